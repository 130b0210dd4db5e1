#include "locc/random_ops.hpp"

namespace locc {

namespace {

CMat ginibre(int d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

}  // namespace

CMat haar_unitary(int d, Rng& rng) {
  CMat g = ginibre(d, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase convention so the distribution is Haar.
  for (int j = 0; j < d; ++j) {
    Complex rjj = r(j, j);
    q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

CMat random_hermitian(int d, Rng& rng) {
  CMat g = ginibre(d, rng);
  return 0.5 * (g + g.adjoint());
}

Eigen::VectorXcd random_pure_state(int d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXcd v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(n(rng), n(rng));
  return v / v.norm();
}

std::pair<CMat, CMat> random_kraus_pair(int d, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  CMat v = haar_unitary(d, rng);
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev(i) = u(rng);
  CMat sqrt_a = v * ev.cwiseSqrt().asDiagonal() * v.adjoint();
  CMat sqrt_b = v * (1.0 - ev.array()).sqrt().matrix().asDiagonal() * v.adjoint();
  CMat u1 = haar_unitary(d, rng);
  CMat u2 = haar_unitary(d, rng);
  return {u1 * sqrt_a, u2 * sqrt_b};
}

}  // namespace locc
