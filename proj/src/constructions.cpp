#include "locc/constructions.hpp"

#include "locc/random_ops.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace locc {

long long smallest_prime_above(long long n) {
  auto is_prime = [](long long x) {
    if (x < 2) return false;
    for (long long f = 2; f * f <= x; ++f)
      if (x % f == 0) return false;
    return true;
  };
  long long c = n + 1;
  while (!is_prime(c)) ++c;
  return c;
}

AppendixAParams appendix_a_params(const std::vector<int>& dims,
                                  std::optional<long long> prime_override) {
  if (dims.empty())
    throw std::invalid_argument("appendix_a_params: no parties");
  AppendixAParams p;
  p.dims = dims;
  p.d_total = 1;
  for (int d : dims) {
    if (d < 2)
      throw std::invalid_argument("appendix_a_params: local dimension < 2");
    p.place_values.push_back(p.d_total);
    p.d_total *= d;
  }
  if (prime_override) {
    const long long n = *prime_override;
    if (n <= p.d_total || smallest_prime_above(n - 1) != n)
      throw std::invalid_argument(
          "appendix_a_params: override must be a prime above the total dimension");
    p.n_outcomes = n;
  } else {
    p.n_outcomes = smallest_prime_above(p.d_total);
  }
  return p;
}

SeparableOperation appendix_a_sep(const std::vector<int>& dims,
                                  std::optional<long long> prime_override,
                                  const Tolerances& tols) {
  const AppendixAParams p = appendix_a_params(dims, prime_override);
  const double w = static_cast<double>(p.d_total) /
                   static_cast<double>(p.n_outcomes);

  std::vector<ProductOperator> raw;
  for (long long j = 0; j < p.n_outcomes; ++j) {
    ProductOperator o;
    o.weight = w;
    for (size_t a = 0; a < dims.size(); ++a) {
      const int d = dims[a];
      Eigen::VectorXcd psi(d);
      for (int m = 0; m < d; ++m) {
        const double phase = 2.0 * std::numbers::pi *
                             static_cast<double>(j % p.n_outcomes) *
                             static_cast<double>(p.place_values[a] % p.n_outcomes) *
                             static_cast<double>(m) /
                             static_cast<double>(p.n_outcomes);
        psi(m) = Complex(std::cos(phase), std::sin(phase)) / std::sqrt(double(d));
      }
      o.locals.push_back(psi * psi.adjoint());
    }
    raw.push_back(std::move(o));
  }
  return make_sep(dims, raw, tols);
}

LoccTree appendix_d_tree(int parties, uint64_t seed) {
  if (parties < 1)
    throw std::invalid_argument("appendix_d_tree: parties < 1");
  if (parties > 16)
    throw std::invalid_argument("appendix_d_tree: tree would exceed the node budget");
  Rng rng(seed);

  // Per-party states drawn so that pairwise overlaps stay away from 0
  // (orthogonal: labels of different measurements would merge via I−Q)
  // and 1 (equal: the projectors themselves would merge).
  std::vector<std::vector<Eigen::VectorXcd>> states(
      static_cast<size_t>(parties));
  auto fresh_state = [&](int party) {
    const auto& have = states[static_cast<size_t>(party - 1)];
    for (int tries = 0; tries < 1000; ++tries) {
      Eigen::VectorXcd xi = random_pure_state(2, rng);
      bool ok = true;
      for (const auto& prev : have) {
        const double ov = std::abs(prev.dot(xi));
        if (ov < 1e-3 || ov > 1.0 - 1e-3) {
          ok = false;
          break;
        }
      }
      if (ok) {
        states[static_cast<size_t>(party - 1)].push_back(xi);
        return xi;
      }
    }
    throw std::runtime_error("appendix_d_tree: state resampling budget exhausted");
  };

  std::function<LoccNode(int)> level = [&](int party) -> LoccNode {
    if (party > parties) return {};
    Eigen::VectorXcd xi = fresh_state(party);
    CMat q = xi * xi.adjoint();
    CMat r = CMat::Identity(2, 2) - q;
    return measure_node(party, [&] {
      std::vector<std::pair<CMat, LoccNode>> branches;
      branches.emplace_back(q, level(party + 1));
      branches.emplace_back(r, level(party + 1));
      return branches;
    }());
  };

  LoccTree t;
  t.dims.assign(static_cast<size_t>(parties), 2);
  t.root = level(1);
  assign_preorder_ids(t);
  return t;
}

LoccTree appendix_d_omit(const LoccTree& t, int k) {
  const int last = t.parties();
  LoccTree out = t;

  std::vector<LoccNode*> last_level;
  std::function<void(LoccNode&)> walk = [&](LoccNode& n) {
    if (!n.leaf() && n.measuring_party == last) last_level.push_back(&n);
    for (LoccNode& c : n.children) walk(c);
  };
  walk(out.root);

  const int m = static_cast<int>(last_level.size());
  if (k < 0 || k > m - 1)
    throw std::invalid_argument("appendix_d_omit: need 0 <= k <= " +
                                std::to_string(m - 1) + ", got " +
                                std::to_string(k));
  // Preorder collection means the right-most measurements come last.
  for (int i = m - k; i < m; ++i) {
    last_level[static_cast<size_t>(i)]->children.clear();
    last_level[static_cast<size_t>(i)]->measuring_party = 0;
  }
  assign_preorder_ids(out);
  return out;
}

SeparableOperation domino_fixture(const Tolerances& tols) {
  auto basis = [](int a) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(3);
    v(a) = 1.0;
    return v;
  };
  auto super = [&](int a, int b, double sign) {
    return ((basis(a) + sign * basis(b)) / std::sqrt(2.0)).eval();
  };

  std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> states;
  states.emplace_back(basis(1), basis(1));
  states.emplace_back(basis(0), super(0, 1, +1.0));
  states.emplace_back(basis(0), super(0, 1, -1.0));
  states.emplace_back(basis(2), super(1, 2, +1.0));
  states.emplace_back(basis(2), super(1, 2, -1.0));
  states.emplace_back(super(1, 2, +1.0), basis(0));
  states.emplace_back(super(1, 2, -1.0), basis(0));
  states.emplace_back(super(0, 1, +1.0), basis(2));
  states.emplace_back(super(0, 1, -1.0), basis(2));

  std::vector<ProductOperator> raw;
  for (const auto& [a, b] : states) {
    ProductOperator o;
    o.weight = 1.0;
    o.locals.push_back(a * a.adjoint());
    o.locals.push_back(b * b.adjoint());
    raw.push_back(std::move(o));
  }
  return make_sep({3, 3}, raw, tols);
}

}  // namespace locc
