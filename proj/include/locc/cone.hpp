#pragma once

#include "locc/operators.hpp"

#include <map>
#include <optional>
#include <vector>

namespace locc {

// Real vectorization of a Hermitian d×d operator: d diagonal entries, then
// √2·Re and √2·Im of the strictly upper triangle in row-major order. The
// scaling makes Tr[AB] the Euclidean dot product of the images.
RVec vectorize(const CMat& h);

// Lawson–Hanson nonnegative least squares: min ‖Ax − b‖₂ s.t. x ≥ 0.
struct NnlsResult {
  RVec x;
  double residual = 0.0;
  int iterations = 0;
};
NnlsResult nnls(const RMat& a, const RVec& b);

// Conic membership: coefficients c ≥ 0 with ‖Σ c_i G_i − target‖_F ≤
// tol·max(1, ‖target‖_F), absent when the target lies outside the cone.
// An empty generator list only contains the zero operator.
struct ConeMembership {
  bool member = false;
  std::vector<double> coeffs;
  double residual = 0.0;
};
ConeMembership cone_membership_full(const CMat& target,
                                    const std::vector<CMat>& generators,
                                    double tol);
std::optional<std::vector<double>> cone_membership(
    const CMat& target, const std::vector<CMat>& generators, double tol);

// Generators of one party's cone, grouped into proportionality classes.
// representatives[c] is the unit-trace representative of class c.
struct ConeFamily {
  int party = 0;
  std::vector<CMat> generators;
  std::vector<std::vector<int>> ray_classes;  // generator indices per class
  std::vector<CMat> representatives;

  int class_count() const { return static_cast<int>(ray_classes.size()); }
};

// Local operators of one party, weighted by the outcome weights, grouped by
// proportionality at tols.cone.
ConeFamily build_cone_family(const SeparableOperation& sep, int party,
                             const Tolerances& tols = {});
ConeFamily cone_family_from_generators(int party,
                                       const std::vector<CMat>& generators,
                                       const Tolerances& tols = {});

// A class is an extreme ray iff its representative is not in the cone
// spanned by the other classes' representatives.
bool is_extreme_ray(int class_id, const ConeFamily& fam, double tol);

// Witness that a class representative decomposes over the other classes:
// coeffs are indexed by class id (own entry 0).
struct ConeWitness {
  std::vector<double> coeffs;
  double residual = 0.0;
};

struct ExtremalityReport {
  int party = 0;
  int e = 0;  // number of extreme-ray classes
  std::vector<int> extreme_class_ids;
  std::map<int, ConeWitness> witnesses;   // non-extreme classes only
  std::map<int, double> residuals;        // membership residual per class
};
ExtremalityReport count_extreme_rays(const ConeFamily& fam, double tol);

// Independent extremality oracle: enumerates support subsets of the other
// representatives (size ≤ max_support, default d²) and tests each with a
// plain least-squares solve. Complete for pointed cones by Carathéodory.
bool brute_force_extremality(int class_id, const ConeFamily& fam,
                             double tol, int max_support = -1);

}  // namespace locc
