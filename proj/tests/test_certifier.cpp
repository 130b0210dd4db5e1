#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "helpers.hpp"

#include "locc/certifier.hpp"
#include "locc/constructions.hpp"
#include "locc/tree.hpp"

using namespace locc;

namespace {

bool has_note(const Verdict& v, const char* needle) {
  for (const std::string& n : v.notes)
    if (n.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("active_parties ignores parties acting proportionally to identity") {
  SeparableOperation sep = appendix_a_sep({2, 2});
  CHECK(active_parties(sep) == std::vector<int>{1, 2});

  // Tack an idle third party onto every outcome.
  SeparableOperation padded = sep;
  padded.dims.push_back(3);
  for (ProductOperator& o : padded.outcomes) {
    o.locals.push_back(CMat::Identity(3, 3) / 3.0);
    o.weight *= 3.0;
  }
  CHECK(active_parties(padded) == std::vector<int>{1, 2});

  Verdict v = certify(padded);
  CHECK(v.active == std::vector<int>{1, 2});
  CHECK(has_note(v, "acting trivially"));
}

TEST_CASE("phase-state family on two qubits violates the bound") {
  SeparableOperation sep = appendix_a_sep({2, 2});
  Verdict v = certify(sep);
  CHECK(v.parties == 2);
  CHECK(v.n_outcomes == 5);
  CHECK(v.e.at(1) == 5);
  CHECK(v.e.at(2) == 5);
  CHECK(v.sum_e == 10);
  CHECK(v.bound == 8);
  CHECK(v.margin == 2);
  CHECK(v.violation_ratio == doctest::Approx(1.25));
  CHECK_FALSE(v.necessary_condition_met);
  CHECK_FALSE(v.satisfied);
  CHECK(v.closure < 1e-10);
  CHECK(v.reports.size() == 2);
  CHECK(has_note(v, "decomposition"));
}

TEST_CASE("phase-state family on two qutrits") {
  Verdict v = certify(appendix_a_sep({3, 3}));
  CHECK(v.n_outcomes == 11);
  CHECK(v.sum_e == 22);
  CHECK(v.bound == 20);
  CHECK(v.margin == 2);
  CHECK_FALSE(v.satisfied);
}

TEST_CASE("violation ratio grows along the qubit sweep") {
  double prev = 0.0;
  const std::vector<long long> expect_n{5, 11, 17};
  for (int p = 2; p <= 4; ++p) {
    SeparableOperation sep = appendix_a_sep(std::vector<int>(p, 2));
    Verdict v = certify(sep);
    CHECK(v.n_outcomes == expect_n[static_cast<size_t>(p - 2)]);
    CHECK(v.sum_e == static_cast<long long>(p) * v.n_outcomes);
    CHECK_FALSE(v.satisfied);
    CHECK(v.violation_ratio > prev);
    prev = v.violation_ratio;
  }
  CHECK(prev == doctest::Approx(34.0 / 16.0));
}

TEST_CASE("domino basis satisfies the bound with margin -2") {
  SeparableOperation sep = domino_fixture();
  Verdict v = certify(sep);
  CHECK(v.n_outcomes == 9);
  CHECK(v.e.at(1) == 7);
  CHECK(v.e.at(2) == 7);
  CHECK(v.sum_e == 14);
  CHECK(v.bound == 16);
  CHECK(v.margin == -2);
  CHECK(v.violation_ratio == doctest::Approx(0.875));
  CHECK(v.necessary_condition_met);
  CHECK(v.satisfied);
  CHECK(has_note(v, "not sufficient"));
}

TEST_CASE("saturating qubit protocols sit exactly on the bound") {
  for (int parties : {2, 3}) {
    LoccTree t = appendix_d_tree(parties, 3);
    SeparableOperation sep = extract_sep(t);
    Verdict v = certify(sep);
    CHECK(v.n_outcomes == (1 << parties));
    CHECK(v.margin == 0);
    CHECK(v.satisfied);
    CHECK(v.violation_ratio == doctest::Approx(1.0));
  }
  // Dropping trailing measurements keeps the margin pinned at zero.
  LoccTree t = appendix_d_tree(3, 3);
  Verdict v = certify(extract_sep(appendix_d_omit(t, 2)));
  CHECK(v.n_outcomes == 6);
  CHECK(v.sum_e == 10);
  CHECK(v.margin == 0);
}

TEST_CASE("the verdict is invariant under party relabeling and local rescaling") {
  SeparableOperation sep = domino_fixture();
  Verdict base = certify(sep);

  std::vector<ProductOperator> swapped;
  for (const ProductOperator& o : sep.outcomes) {
    ProductOperator s;
    s.weight = o.weight;
    s.locals = {o.locals[1], o.locals[0]};
    swapped.push_back(std::move(s));
  }
  Verdict v1 = certify(make_sep({3, 3}, swapped));
  CHECK(v1.sum_e == base.sum_e);
  CHECK(v1.margin == base.margin);
  CHECK(v1.e.at(1) == base.e.at(2));
  CHECK(v1.e.at(2) == base.e.at(1));

  std::vector<ProductOperator> rescaled;
  for (const ProductOperator& o : sep.outcomes) {
    ProductOperator s;
    s.weight = o.weight / 6.0;
    s.locals = {3.0 * o.locals[0], 2.0 * o.locals[1]};
    rescaled.push_back(std::move(s));
  }
  Verdict v2 = certify(make_sep({3, 3}, rescaled));
  CHECK(v2.n_outcomes == base.n_outcomes);
  CHECK(v2.sum_e == base.sum_e);
  CHECK(v2.margin == base.margin);
}

TEST_CASE("certify refuses operations that do not close to the identity") {
  SeparableOperation sep = appendix_a_sep({2, 2});
  sep.outcomes.pop_back();
  CHECK_THROWS_AS(certify(sep), ClosureError);
}

TEST_CASE("refined bipartite bound tightens the domino verdict") {
  SeparableOperation sep = domino_fixture();
  CertifyOptions opts;
  opts.refined_bipartite = true;
  Verdict v = certify(sep, opts);
  CHECK(v.refined_applied);
  CHECK(v.refined_bound == 13);  // floor(27/2)
  CHECK(v.necessary_condition_met);
  CHECK_FALSE(v.refined_satisfied);
  CHECK_FALSE(v.satisfied);
  CHECK(has_note(v, "stated without proof in this paper"));

  Verdict again = refined_bipartite_check(certify(sep), sep);
  CHECK(again.refined_bound == v.refined_bound);
  CHECK(again.satisfied == v.satisfied);
}

TEST_CASE("refined bound is refused outside its domain") {
  SeparableOperation three = appendix_a_sep({2, 2, 2});
  Verdict v3 = certify(three);
  CHECK_THROWS_AS(refined_bipartite_check(v3, three), RefinedNotApplicable);

  // Bipartite but with only four outcomes.
  SeparableOperation small = extract_sep(appendix_d_tree(2, 9));
  REQUIRE(small.outcome_count() == 4);
  Verdict vs = certify(small);
  CHECK_THROWS_AS(refined_bipartite_check(vs, small), RefinedNotApplicable);

  CertifyOptions opts;
  opts.refined_bipartite = true;
  CHECK_THROWS_AS(certify(small, opts), RefinedNotApplicable);
}
