#include "locc/cone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace locc {

RVec vectorize(const CMat& h) {
  const Eigen::Index d = h.rows();
  if (d == 0 || h.cols() != d)
    throw std::invalid_argument("vectorize: expected a square matrix");
  RVec v(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) v(k++) = h(i, i).real();
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v(k++) = r2 * h(i, j).real();
      v(k++) = r2 * h(i, j).imag();
    }
  return v;
}

NnlsResult nnls(const RMat& a, const RVec& b) {
  const Eigen::Index m = a.cols();
  NnlsResult res;
  res.x = RVec::Zero(m);
  if (m == 0) {
    res.residual = b.norm();
    return res;
  }

  // Columns are normalized so the dual threshold is scale-free.
  RMat an = a;
  RVec colnorm(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    colnorm(j) = a.col(j).norm();
    if (colnorm(j) > 0) an.col(j) /= colnorm(j);
  }

  std::vector<bool> passive(static_cast<size_t>(m), false);
  RVec x = RVec::Zero(m);
  RVec resid = b;
  const double dual_eps = 1e-12 * std::max(1.0, (an.transpose() * b).cwiseAbs().maxCoeff());
  const int max_iter = 10 * static_cast<int>(m) + 100;
  int iter = 0;

  auto solve_passive = [&](RVec& sol) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j)
      if (passive[static_cast<size_t>(j)]) idx.push_back(j);
    RMat ap(an.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = an.col(idx[c]);
    RVec z = ap.completeOrthogonalDecomposition().solve(b);
    sol = RVec::Zero(m);
    for (size_t c = 0; c < idx.size(); ++c) sol(idx[c]) = z(static_cast<Eigen::Index>(c));
  };

  while (iter++ < max_iter) {
    RVec w = an.transpose() * resid;
    Eigen::Index best = -1;
    double best_w = dual_eps;
    for (Eigen::Index j = 0; j < m; ++j)
      if (!passive[static_cast<size_t>(j)] && colnorm(j) > 0 && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = true;

    RVec z;
    solve_passive(z);
    // Inner loop: retreat until the passive solution is feasible.
    while (true) {
      double alpha = 1.0;
      Eigen::Index blocker = -1;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!passive[static_cast<size_t>(j)]) continue;
        if (z(j) <= 0) {
          const double step = x(j) / (x(j) - z(j));
          if (step < alpha) {
            alpha = step;
            blocker = j;
          }
        }
      }
      if (blocker < 0) break;
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < m; ++j)
        if (passive[static_cast<size_t>(j)] && (j == blocker || x(j) <= 0)) {
          passive[static_cast<size_t>(j)] = false;
          x(j) = 0;
        }
      bool any = std::any_of(passive.begin(), passive.end(), [](bool p) { return p; });
      if (!any) {
        z = RVec::Zero(m);
        break;
      }
      solve_passive(z);
    }
    x = z.cwiseMax(0.0);
    resid = b - an * x;
  }

  for (Eigen::Index j = 0; j < m; ++j)
    res.x(j) = colnorm(j) > 0 ? x(j) / colnorm(j) : 0.0;
  res.residual = resid.norm();
  res.iterations = iter;
  return res;
}

ConeMembership cone_membership_full(const CMat& target,
                                    const std::vector<CMat>& generators,
                                    double tol) {
  ConeMembership out;
  const double scale = std::max(1.0, target.norm());
  if (generators.empty()) {
    out.residual = target.norm();
    out.member = out.residual <= tol * scale;
    return out;
  }
  const RVec b = vectorize(target);
  RMat a(b.size(), static_cast<Eigen::Index>(generators.size()));
  for (size_t j = 0; j < generators.size(); ++j) {
    if (generators[j].rows() != target.rows())
      throw std::invalid_argument("cone_membership: generator dimension mismatch");
    a.col(static_cast<Eigen::Index>(j)) = vectorize(generators[j]);
  }
  NnlsResult r = nnls(a, b);
  out.coeffs.assign(r.x.data(), r.x.data() + r.x.size());
  out.residual = r.residual;
  out.member = r.residual <= tol * scale;
  return out;
}

std::optional<std::vector<double>> cone_membership(
    const CMat& target, const std::vector<CMat>& generators, double tol) {
  ConeMembership m = cone_membership_full(target, generators, tol);
  if (!m.member) return std::nullopt;
  return m.coeffs;
}

namespace {

ConeFamily group_by_proportionality(int party, const std::vector<CMat>& gens,
                                    const Tolerances& tols) {
  ConeFamily fam;
  fam.party = party;
  fam.generators = gens;
  for (size_t j = 0; j < gens.size(); ++j) {
    const CMat& g = gens[j];
    if (g.norm() <= 0)
      throw std::invalid_argument("cone family: zero generator");
    bool placed = false;
    for (size_t c = 0; c < fam.representatives.size() && !placed; ++c) {
      if (proportionality(g, fam.representatives[c], tols.cone)) {
        fam.ray_classes[c].push_back(static_cast<int>(j));
        placed = true;
      }
    }
    if (!placed) {
      const double tr = g.trace().real();
      if (tr <= 0)
        throw std::invalid_argument("cone family: generator with non-positive trace");
      fam.ray_classes.push_back({static_cast<int>(j)});
      fam.representatives.push_back(g / tr);
    }
  }
  return fam;
}

}  // namespace

ConeFamily build_cone_family(const SeparableOperation& sep, int party,
                             const Tolerances& tols) {
  if (party < 1 || party > sep.parties())
    throw std::invalid_argument("build_cone_family: party out of range");
  std::vector<CMat> gens;
  gens.reserve(sep.outcomes.size());
  for (const ProductOperator& o : sep.outcomes)
    gens.push_back(o.weight * o.locals[static_cast<size_t>(party - 1)]);
  return group_by_proportionality(party, gens, tols);
}

ConeFamily cone_family_from_generators(int party,
                                       const std::vector<CMat>& generators,
                                       const Tolerances& tols) {
  return group_by_proportionality(party, generators, tols);
}

bool is_extreme_ray(int class_id, const ConeFamily& fam, double tol) {
  if (class_id < 0 || class_id >= fam.class_count())
    throw std::invalid_argument("is_extreme_ray: class id out of range");
  // A single ray is extreme in its own cone.
  if (fam.class_count() == 1) return true;
  std::vector<CMat> others;
  others.reserve(static_cast<size_t>(fam.class_count()) - 1);
  for (int c = 0; c < fam.class_count(); ++c)
    if (c != class_id) others.push_back(fam.representatives[static_cast<size_t>(c)]);
  return !cone_membership_full(fam.representatives[static_cast<size_t>(class_id)],
                               others, tol)
              .member;
}

ExtremalityReport count_extreme_rays(const ConeFamily& fam, double tol) {
  ExtremalityReport rep;
  rep.party = fam.party;
  for (int c = 0; c < fam.class_count(); ++c) {
    std::vector<CMat> others;
    for (int k = 0; k < fam.class_count(); ++k)
      if (k != c) others.push_back(fam.representatives[static_cast<size_t>(k)]);
    ConeMembership m = cone_membership_full(
        fam.representatives[static_cast<size_t>(c)], others, tol);
    rep.residuals[c] = m.residual;
    if (m.member) {
      ConeWitness w;
      w.residual = m.residual;
      w.coeffs.assign(static_cast<size_t>(fam.class_count()), 0.0);
      size_t k = 0;
      for (int j = 0; j < fam.class_count(); ++j)
        if (j != c) w.coeffs[static_cast<size_t>(j)] = m.coeffs[k++];
      rep.witnesses[c] = std::move(w);
    } else {
      rep.extreme_class_ids.push_back(c);
    }
  }
  rep.e = static_cast<int>(rep.extreme_class_ids.size());
  return rep;
}

bool brute_force_extremality(int class_id, const ConeFamily& fam, double tol,
                             int max_support) {
  if (class_id < 0 || class_id >= fam.class_count())
    throw std::invalid_argument("brute_force_extremality: class id out of range");
  if (fam.class_count() == 1) return true;

  const CMat& target = fam.representatives[static_cast<size_t>(class_id)];
  const double scale = std::max(1.0, target.norm());
  const RVec b = vectorize(target);

  std::vector<RVec> cols;
  for (int c = 0; c < fam.class_count(); ++c)
    if (c != class_id)
      cols.push_back(vectorize(fam.representatives[static_cast<size_t>(c)]));
  const int n = static_cast<int>(cols.size());
  if (n > 20)
    throw std::invalid_argument("brute_force_extremality: too many classes");

  const int dim2 = static_cast<int>(target.rows() * target.rows());
  const int cap = max_support < 0 ? dim2 : max_support;

  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) > cap) continue;
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    RMat a(b.size(), static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c)
      a.col(static_cast<Eigen::Index>(c)) = cols[static_cast<size_t>(idx[c])];
    RVec x = a.completeOrthogonalDecomposition().solve(b);
    if ((a * x - b).norm() > tol * scale) continue;
    if (x.minCoeff() >= -tol) return false;  // nonnegative combination found
  }
  return true;
}

}  // namespace locc
