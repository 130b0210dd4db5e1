#include "locc/operators.hpp"

#include <cmath>
#include <sstream>

namespace locc {

namespace {

// Operators with Frobenius norm below this are treated as zero input.
constexpr double kZeroNorm = 1e-14;

void require_square(const CMat& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows()
       << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

CMat identity(int d) { return CMat::Identity(d, d); }

double frob(const CMat& a) { return a.norm(); }

double max_abs(const CMat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool nearly_equal(const CMat& a, const CMat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= tol * std::max(1.0, b.norm());
}

double min_eigenvalue(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool validate_hermitian(const CMat& h, double tol,
                        std::optional<double> tol_psd) {
  require_square(h, "validate_hermitian");
  const double scale = std::max(1.0, max_abs(h));
  if (max_abs(h - h.adjoint()) > tol * scale) return false;
  if (tol_psd) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -(*tol_psd) * std::max(1.0, std::abs(hi))) return false;
  }
  return true;
}

std::optional<double> proportionality(const CMat& a, const CMat& b,
                                      double tol) {
  require_square(a, "proportionality");
  require_square(b, "proportionality");
  if (a.rows() != b.rows())
    throw std::invalid_argument("proportionality: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na <= kZeroNorm || nb <= kZeroNorm)
    throw std::invalid_argument("proportionality: zero operator");
  // Tr[AB] is real for Hermitian inputs; rounding may leave a tiny
  // imaginary part which we drop.
  const double lambda = (a * b).trace().real() / (b * b).trace().real();
  if (lambda <= 0.0) return std::nullopt;
  if ((a - lambda * b).norm() > tol * na) return std::nullopt;
  return lambda;
}

std::optional<Complex> proportionality_general(const CMat& a, const CMat& b,
                                               double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("proportionality_general: shape mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na <= kZeroNorm || nb <= kZeroNorm)
    throw std::invalid_argument("proportionality_general: zero operator");
  const Complex lambda = (b.adjoint() * a).trace() / (b.adjoint() * b).trace();
  if ((a - lambda * b).norm() > tol * na) return std::nullopt;
  return lambda;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat tensor_all(const std::vector<CMat>& locals) {
  if (locals.empty())
    throw std::invalid_argument("tensor_all: empty factor list");
  CMat out = locals.front();
  for (size_t i = 1; i < locals.size(); ++i) out = kron(out, locals[i]);
  return out;
}

CMat ProductOperator::product() const {
  return weight * tensor_all(locals);
}

long long SeparableOperation::full_dim() const {
  long long d = 1;
  for (int di : dims) d *= di;
  return d;
}

SeparableOperation make_sep(std::vector<int> dims,
                            const std::vector<ProductOperator>& raw,
                            const Tolerances& tols) {
  if (dims.empty()) throw std::invalid_argument("make_sep: no parties");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("make_sep: local dimension < 1");
  if (raw.empty()) throw std::invalid_argument("make_sep: no outcomes");

  SeparableOperation sep;
  sep.dims = std::move(dims);
  const int p = sep.parties();

  for (size_t j = 0; j < raw.size(); ++j) {
    const ProductOperator& in = raw[j];
    if (static_cast<int>(in.locals.size()) != p)
      throw std::invalid_argument("make_sep: outcome " + std::to_string(j) +
                                  " has wrong party count");
    ProductOperator out;
    out.weight = in.weight;
    out.locals.reserve(in.locals.size());
    for (int alpha = 1; alpha <= p; ++alpha) {
      const CMat& l = in.locals[static_cast<size_t>(alpha - 1)];
      if (l.rows() != sep.dim_of(alpha) || l.cols() != sep.dim_of(alpha))
        throw std::invalid_argument("make_sep: outcome " + std::to_string(j) +
                                    ", party " + std::to_string(alpha) +
                                    ": dimension mismatch");
      if (!validate_hermitian(l, tols.herm, tols.psd))
        throw std::invalid_argument("make_sep: outcome " + std::to_string(j) +
                                    ", party " + std::to_string(alpha) +
                                    ": not Hermitian PSD");
      const double tr = l.trace().real();
      if (tr <= tols.trace)
        throw std::invalid_argument("make_sep: outcome " + std::to_string(j) +
                                    ", party " + std::to_string(alpha) +
                                    ": trace not positive");
      out.weight *= tr;
      out.locals.push_back(l / tr);
    }
    if (!(out.weight > 0.0))
      throw std::invalid_argument("make_sep: outcome " + std::to_string(j) +
                                  ": weight not positive");

    // Merge with an existing outcome when all normalized locals agree.
    bool merged = false;
    for (ProductOperator& have : sep.outcomes) {
      bool same = true;
      for (int k = 0; k < p && same; ++k)
        same = nearly_equal(out.locals[static_cast<size_t>(k)],
                            have.locals[static_cast<size_t>(k)], tols.cone);
      if (same) {
        have.weight += out.weight;
        merged = true;
        break;
      }
    }
    if (!merged) sep.outcomes.push_back(std::move(out));
  }
  return sep;
}

double closure_residual(const SeparableOperation& sep) {
  const long long d = sep.full_dim();
  CMat sum = CMat::Zero(d, d);
  for (const ProductOperator& o : sep.outcomes) sum += o.product();
  return (sum - CMat::Identity(d, d)).norm();
}

SeparableOperation sep_from_kraus(const std::vector<std::vector<CMat>>& kraus,
                                  std::vector<int> dims,
                                  const Tolerances& tols) {
  if (kraus.empty()) throw std::invalid_argument("sep_from_kraus: no outcomes");
  const int p = static_cast<int>(dims.size());

  std::vector<ProductOperator> raw;
  raw.reserve(kraus.size());
  for (size_t j = 0; j < kraus.size(); ++j) {
    if (static_cast<int>(kraus[j].size()) != p)
      throw std::invalid_argument("sep_from_kraus: outcome " +
                                  std::to_string(j) +
                                  " has wrong party count");
    ProductOperator out;
    out.weight = 1.0;
    for (const CMat& k : kraus[j]) out.locals.push_back(k.adjoint() * k);
    raw.push_back(std::move(out));
  }

  SeparableOperation sep = make_sep(std::move(dims), raw, tols);
  const double res = closure_residual(sep);
  if (res > tols.closure) {
    std::ostringstream os;
    os << "sep_from_kraus: completeness violated, residual " << res;
    throw ClosureError(os.str());
  }
  return sep;
}

}  // namespace locc
