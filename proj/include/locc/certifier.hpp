#pragma once

#include "locc/cone.hpp"
#include "locc/operators.hpp"

#include <map>
#include <string>
#include <vector>

namespace locc {

// Parties with at least one local operator not proportional to the
// identity. The others never act and do not contribute rays.
std::vector<int> active_parties(const SeparableOperation& sep,
                                const Tolerances& tols = {});

struct Verdict {
  int parties = 0;
  int n_outcomes = 0;
  std::vector<int> active;
  std::map<int, int> e;     // party -> extreme ray count (active parties)
  long long sum_e = 0;
  long long bound = 0;      // 2(N−1)
  long long margin = 0;     // sum_e − bound; 0 means saturated
  double violation_ratio = 0.0;
  bool necessary_condition_met = false;  // sum_e ≤ 2(N−1)
  bool satisfied = false;   // overall, includes the refined bound when applied
  bool refined_applied = false;
  long long refined_bound = 0;
  bool refined_satisfied = true;
  double closure = 0.0;
  std::vector<ExtremalityReport> reports;
  std::vector<std::string> notes;
};

struct CertifyOptions {
  Tolerances tols;
  bool refined_bipartite = false;  // apply the ⌊3N/2⌋ bipartite bound
};

struct RefinedNotApplicable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Decides whether the operation passes the finite-round LOCC necessary
// condition: Σ_α e_α ≤ 2(N−1) over active parties. Throws ClosureError when
// the outcomes do not sum to the identity within tols.closure.
Verdict certify(const SeparableOperation& sep, const CertifyOptions& opts = {});

// Sharper bipartite bound ⌊3N/2⌋, only for P = 2 and N > 4; refused with
// RefinedNotApplicable otherwise. Overall satisfaction then follows the
// refined bound.
Verdict refined_bipartite_check(const Verdict& v, const SeparableOperation& sep);

}  // namespace locc
