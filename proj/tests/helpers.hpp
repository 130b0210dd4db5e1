#pragma once

#include "locc/operators.hpp"
#include "locc/random_ops.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

namespace testhelp {

using locc::CMat;
using locc::Complex;

inline CMat ket(int d, int i) {
  CMat m = CMat::Zero(d, 1);
  m(i, 0) = 1.0;
  return m;
}

inline CMat proj(const CMat& v) { return v * v.adjoint(); }

inline double mat_dist(const CMat& a, const CMat& b) { return (a - b).norm(); }

// Closed-form eigenvalues of a 2×2 Hermitian [[a, c], [conj(c), b]].
inline std::pair<double, double> eig2(double a, double b, Complex c) {
  const double mid = 0.5 * (a + b);
  const double rad = std::sqrt(0.25 * (a - b) * (a - b) + std::norm(c));
  return {mid - rad, mid + rad};
}

// Random PSD of given rank (d x d), scaled to unit trace.
inline CMat random_psd(int d, int rank, locc::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat g(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(n(rng), n(rng));
  CMat m = g * g.adjoint();
  return m / m.trace().real();
}

// Two weighted separable operations describe the same statistics: outcomes
// match one-to-one by per-party locals and the weights agree.
inline bool sep_equal(const locc::SeparableOperation& a,
                      const locc::SeparableOperation& b, double tol = 1e-8) {
  if (a.dims != b.dims) return false;
  if (a.outcomes.size() != b.outcomes.size()) return false;
  std::vector<bool> used(b.outcomes.size(), false);
  for (const locc::ProductOperator& oa : a.outcomes) {
    bool hit = false;
    for (size_t j = 0; j < b.outcomes.size() && !hit; ++j) {
      if (used[j]) continue;
      const locc::ProductOperator& ob = b.outcomes[j];
      if (std::abs(oa.weight - ob.weight) >
          tol * std::max(1.0, std::abs(ob.weight)))
        continue;
      bool same = true;
      for (size_t p = 0; p < oa.locals.size() && same; ++p)
        same = locc::nearly_equal(oa.locals[p], ob.locals[p], tol);
      if (same) {
        used[j] = true;
        hit = true;
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace testhelp
