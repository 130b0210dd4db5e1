#include "locc/certifier.hpp"

#include <cmath>
#include <sstream>

namespace locc {

std::vector<int> active_parties(const SeparableOperation& sep,
                                const Tolerances& tols) {
  std::vector<int> out;
  for (int a = 1; a <= sep.parties(); ++a) {
    const CMat eye = CMat::Identity(sep.dim_of(a), sep.dim_of(a));
    bool active = false;
    for (const ProductOperator& o : sep.outcomes)
      if (!proportionality(o.locals[static_cast<size_t>(a - 1)], eye,
                           tols.cone)) {
        active = true;
        break;
      }
    if (active) out.push_back(a);
  }
  return out;
}

Verdict certify(const SeparableOperation& sep, const CertifyOptions& opts) {
  Verdict v;
  v.parties = sep.parties();
  v.n_outcomes = sep.outcome_count();

  v.closure = closure_residual(sep);
  if (v.closure > opts.tols.closure) {
    std::ostringstream os;
    os << "certify: outcomes do not sum to the identity, residual "
       << v.closure << " > " << opts.tols.closure;
    throw ClosureError(os.str());
  }

  v.active = active_parties(sep, opts.tols);
  for (int a : v.active) {
    ConeFamily fam = build_cone_family(sep, a, opts.tols);
    ExtremalityReport rep = count_extreme_rays(fam, opts.tols.cone);
    v.e[a] = rep.e;
    v.sum_e += rep.e;
    v.reports.push_back(std::move(rep));
  }
  if (static_cast<int>(v.active.size()) < v.parties)
    v.notes.push_back("parties acting trivially were excluded from the count");

  v.bound = 2LL * (v.n_outcomes - 1);
  v.margin = v.sum_e - v.bound;
  v.violation_ratio =
      v.bound > 0 ? static_cast<double>(v.sum_e) / static_cast<double>(v.bound)
                  : 0.0;
  v.necessary_condition_met = v.sum_e <= v.bound;
  v.satisfied = v.necessary_condition_met;
  if (v.necessary_condition_met) {
    v.notes.push_back(
        "the bound is necessary for finite-round LOCC, not sufficient");
  } else {
    v.notes.push_back(
        "the certificate applies to the given product decomposition; "
        "distinct decompositions of the same channel are certified separately");
  }

  if (opts.refined_bipartite) return refined_bipartite_check(v, sep);
  return v;
}

Verdict refined_bipartite_check(const Verdict& v,
                                const SeparableOperation& sep) {
  if (sep.parties() != 2 || sep.outcome_count() <= 4)
    throw RefinedNotApplicable(
        "refined bipartite bound requires P = 2 and N > 4");
  Verdict out = v;
  out.refined_applied = true;
  out.refined_bound = (3LL * sep.outcome_count()) / 2;
  out.refined_satisfied = out.sum_e <= out.refined_bound;
  out.satisfied = out.necessary_condition_met && out.refined_satisfied;
  out.notes.push_back(
      "refined bipartite bound applied (stated without proof in this paper)");
  return out;
}

}  // namespace locc
