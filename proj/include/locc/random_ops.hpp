#pragma once

#include "locc/operators.hpp"

#include <random>

namespace locc {

using Rng = std::mt19937_64;

// Haar-distributed unitary via QR of a complex Ginibre matrix.
CMat haar_unitary(int d, Rng& rng);

CMat random_hermitian(int d, Rng& rng);

// Random pure state, uniform on the unit sphere.
Eigen::VectorXcd random_pure_state(int d, Rng& rng);

// Well-conditioned two-outcome measurement: K1 = U1·√A, K2 = U2·√(I−A)
// with the eigenvalues of A drawn from [lo, hi]. Satisfies
// K1†K1 + K2†K2 = I by construction.
std::pair<CMat, CMat> random_kraus_pair(int d, Rng& rng, double lo = 0.15,
                                        double hi = 0.85);

}  // namespace locc
