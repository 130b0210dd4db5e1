#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "helpers.hpp"

#include "locc/certifier.hpp"
#include "locc/cone.hpp"
#include "locc/constructions.hpp"

#include <functional>
#include <set>

using namespace locc;

TEST_CASE("smallest_prime_above") {
  CHECK(smallest_prime_above(1) == 2);
  CHECK(smallest_prime_above(2) == 3);
  CHECK(smallest_prime_above(4) == 5);
  CHECK(smallest_prime_above(8) == 11);
  CHECK(smallest_prime_above(9) == 11);
  CHECK(smallest_prime_above(16) == 17);
  CHECK(smallest_prime_above(25) == 29);
  CHECK(smallest_prime_above(32) == 37);
}

TEST_CASE("phase family parameters: place values and outcome count") {
  AppendixAParams p = appendix_a_params({2, 2});
  CHECK(p.d_total == 4);
  CHECK(p.n_outcomes == 5);
  CHECK(p.place_values == std::vector<long long>{1, 2});

  AppendixAParams q = appendix_a_params({2, 3, 2});
  CHECK(q.d_total == 12);
  CHECK(q.n_outcomes == 13);
  CHECK(q.place_values == std::vector<long long>{1, 2, 6});

  CHECK_THROWS_AS(appendix_a_params({}), std::invalid_argument);
  CHECK_THROWS_AS(appendix_a_params({2, 1}), std::invalid_argument);
}

TEST_CASE("outcome count can be overridden by a larger prime only") {
  CHECK(appendix_a_params({2, 2}, 7).n_outcomes == 7);
  CHECK(appendix_a_params({2, 2}, 5).n_outcomes == 5);
  CHECK_THROWS_AS(appendix_a_params({2, 2}, 6), std::invalid_argument);
  CHECK_THROWS_AS(appendix_a_params({2, 2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(appendix_a_params({2, 2}, 4), std::invalid_argument);

  SeparableOperation sep = appendix_a_sep({2, 2}, 7);
  CHECK(sep.outcome_count() == 7);
  Verdict v = certify(sep);
  CHECK(v.sum_e == 14);
  CHECK(v.bound == 12);
  CHECK(v.margin == 2);
}

TEST_CASE("phase states are balanced rank-one projectors with exact closure") {
  SeparableOperation sep = appendix_a_sep({2, 3});
  CHECK(sep.outcome_count() == 7);
  CHECK(closure_residual(sep) < 1e-12);
  for (const ProductOperator& o : sep.outcomes) {
    CHECK(o.weight == doctest::Approx(6.0 / 7.0));
    for (size_t a = 0; a < o.locals.size(); ++a) {
      const CMat& l = o.locals[a];
      CHECK(std::abs(l.trace().real() - 1.0) < 1e-12);
      CHECK(std::abs((l * l - l).norm()) < 1e-12);  // projector after trace norm
      // Balanced amplitudes: every diagonal entry is 1/d.
      for (Eigen::Index i = 0; i < l.rows(); ++i)
        CHECK(std::abs(l(i, i) - Complex(1.0 / double(l.rows()), 0)) < 1e-12);
    }
  }
  // Every party shows N pairwise distinct rays.
  for (int a = 1; a <= 2; ++a)
    CHECK(build_cone_family(sep, a).class_count() == 7);
}

TEST_CASE("mixed-radix place values hit every total exactly once") {
  // All ordered dimension tuples with entries >= 2 and product <= 64.
  std::vector<std::vector<int>> all_dims;
  std::function<void(std::vector<int>&, long long)> gen =
      [&](std::vector<int>& cur, long long prod) {
        if (!cur.empty()) all_dims.push_back(cur);
        for (int d = 2; prod * d <= 64; ++d) {
          cur.push_back(d);
          gen(cur, prod * d);
          cur.pop_back();
        }
      };
  std::vector<int> cur;
  gen(cur, 1);
  CHECK(all_dims.size() > 100);

  for (const std::vector<int>& dims : all_dims) {
    AppendixAParams p = appendix_a_params(dims);
    std::set<long long> seen;
    std::vector<int> idx(dims.size(), 0);
    while (true) {
      long long total = 0;
      for (size_t a = 0; a < dims.size(); ++a)
        total += p.place_values[a] * idx[a];
      seen.insert(total);
      size_t a = 0;
      while (a < dims.size() && ++idx[a] == dims[a]) idx[a++] = 0;
      if (a == dims.size()) break;
    }
    REQUIRE(static_cast<long long>(seen.size()) == p.d_total);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == p.d_total - 1);
  }
}

TEST_CASE("saturating qubit trees have the advertised shape") {
  LoccTree t = appendix_d_tree(3, 23);
  CHECK(t.dims == std::vector<int>{2, 2, 2});
  CHECK(count_nodes(t.root) == 15);
  CHECK(tree_depth(t.root) == 3);
  CHECK(validate_tree(t).empty());
  CHECK(is_canonical(t));

  SeparableOperation sep = extract_sep(t);
  CHECK(sep.outcome_count() == 8);
  Verdict v = certify(sep);
  CHECK(v.sum_e == 14);
  CHECK(v.margin == 0);

  CHECK_THROWS_AS(appendix_d_tree(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(appendix_d_tree(17, 1), std::invalid_argument);

  // Determinism in the seed.
  LoccTree t2 = appendix_d_tree(3, 23);
  SeparableOperation sep2 = extract_sep(t2);
  CHECK(testhelp::sep_equal(sep, sep2, 1e-14));
}

TEST_CASE("omitting trailing measurements trades rays for merged outcomes") {
  LoccTree t = appendix_d_tree(3, 29);

  LoccTree o1 = appendix_d_omit(t, 1);
  CHECK(count_nodes(o1.root) == 13);
  Verdict v1 = certify(extract_sep(o1));
  CHECK(v1.n_outcomes == 7);
  CHECK(v1.sum_e == 12);
  CHECK(v1.margin == 0);

  LoccTree o3 = appendix_d_omit(t, 3);
  Verdict v3 = certify(extract_sep(o3));
  CHECK(v3.n_outcomes == 5);
  CHECK(v3.sum_e == 8);
  CHECK(v3.margin == 0);

  LoccTree o0 = appendix_d_omit(t, 0);
  CHECK(count_nodes(o0.root) == count_nodes(t.root));

  CHECK_THROWS_AS(appendix_d_omit(t, 4), std::invalid_argument);
  CHECK_THROWS_AS(appendix_d_omit(t, -1), std::invalid_argument);
}

TEST_CASE("the omitted branch keeps an identity label that is interior") {
  LoccTree t = appendix_d_omit(appendix_d_tree(2, 31), 1);
  SeparableOperation sep = extract_sep(t);
  REQUIRE(sep.outcome_count() == 3);

  ConeFamily fam = build_cone_family(sep, 2);
  REQUIRE(fam.class_count() == 3);
  ExtremalityReport rep = count_extreme_rays(fam, 1e-8);
  CHECK(rep.e == 2);
  // The non-extreme class is the identity the skipped measurement left.
  REQUIRE(rep.witnesses.size() == 1);
  const int interior = rep.witnesses.begin()->first;
  CHECK(proportionality(fam.representatives[static_cast<size_t>(interior)],
                        CMat::Identity(2, 2), 1e-10)
            .has_value());
}

TEST_CASE("domino basis: nine orthogonal products, seven rays per side") {
  SeparableOperation sep = domino_fixture();
  CHECK(sep.dims == std::vector<int>{3, 3});
  CHECK(sep.outcome_count() == 9);
  CHECK(closure_residual(sep) < 1e-12);
  for (const ProductOperator& o : sep.outcomes)
    CHECK(o.weight == doctest::Approx(1.0));
  for (int a = 1; a <= 2; ++a) {
    ConeFamily fam = build_cone_family(sep, a);
    CHECK(fam.class_count() == 7);
    CHECK(count_extreme_rays(fam, 1e-8).e == 7);
  }
}
