#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace locc {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Tolerances shared by the whole toolkit. The defaults assume analytic
// inputs whose residuals are at rounding level.
struct Tolerances {
  double herm = 1e-10;     // Hermiticity, max-entry deviation (scaled)
  double trace = 1e-10;    // unit-trace check on local operators
  double closure = 1e-9;   // completeness / closure residual, Frobenius
  double psd = 1e-9;       // eigenvalue floor for positivity
  double cone = 1e-8;      // relative residual for proportionality / cone membership
};

struct ClosureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CMat identity(int d);
double frob(const CMat& a);
double max_abs(const CMat& a);

// ‖a − b‖_F ≤ tol·max(1, ‖b‖_F)
bool nearly_equal(const CMat& a, const CMat& b, double tol);

// smallest eigenvalue (Hermitian part is assumed; used for PSD checks)
double min_eigenvalue(const CMat& h);

// Hermiticity check: max|H − H†| ≤ tol·max(1, max|H|). When tol_psd is
// given the operator must additionally be positive semidefinite, min
// eigenvalue ≥ −tol_psd·max(1, λ_max). Throws on a non-square matrix.
bool validate_hermitian(const CMat& h, double tol,
                        std::optional<double> tol_psd = std::nullopt);

// λ with ‖A − λB‖_F ≤ tol·‖A‖_F, λ = Tr[AB]/Tr[B²], absent if no positive
// such λ exists. Both operators must be Hermitian and nonzero.
std::optional<double> proportionality(const CMat& a, const CMat& b, double tol);

// Complex-scalar variant for general (non-Hermitian) matrices, λ = Tr[B†A]/Tr[B†B].
std::optional<Complex> proportionality_general(const CMat& a, const CMat& b,
                                               double tol);

CMat kron(const CMat& a, const CMat& b);

// Kronecker product in fixed party order 1…P.
CMat tensor_all(const std::vector<CMat>& locals);

// One outcome of a separable operation: unit-trace local positive
// operators, one per party, and a positive weight.
struct ProductOperator {
  double weight = 0.0;
  std::vector<CMat> locals;

  CMat product() const;  // weight · ⊗_α locals[α]
};

struct SeparableOperation {
  std::vector<int> dims;                  // d_1 … d_P
  std::vector<ProductOperator> outcomes;  // N distinct outcomes

  int parties() const { return static_cast<int>(dims.size()); }
  int dim_of(int party) const { return dims.at(static_cast<size_t>(party - 1)); }
  long long full_dim() const;
  int outcome_count() const { return static_cast<int>(outcomes.size()); }
};

// Builds a SeparableOperation from raw (weight, locals) outcomes: locals are
// validated Hermitian PSD, traces are folded into the weights, and outcomes
// whose full product operators are proportional are merged by summing
// weights. Throws std::invalid_argument on malformed input.
SeparableOperation make_sep(std::vector<int> dims,
                            const std::vector<ProductOperator>& raw,
                            const Tolerances& tols = {});

// ‖Σ_j weight_j ⊗_α local_j^(α) − I_D‖_F
double closure_residual(const SeparableOperation& sep);

// Builds the separable operation implemented by product Kraus operators
// kraus[j][party−1] = K_j^(α). Checks Σ_j K_j†K_j = I within tols.closure
// (throws ClosureError otherwise) and merges proportional outcomes.
SeparableOperation sep_from_kraus(const std::vector<std::vector<CMat>>& kraus,
                                  std::vector<int> dims,
                                  const Tolerances& tols = {});

}  // namespace locc
