#pragma once

// Seeded random objects for sweeps and property tests. Everything is driven by
// std::mt19937_64 so a (seed, call sequence) pair reproduces bit-identically
// with the same standard library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "entdist/states.hpp"
#include "entdist/tensor.hpp"

namespace entdist {

using Rng = std::mt19937_64;

inline ComplexMatrix random_complex_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = g(rng);
      const double im = g(rng);
      m(r, c) = {re, im};
    }
  }
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  return hermitian_part(random_complex_matrix(n, n, rng));
}

inline ComplexMatrix random_psd(std::size_t n, Rng& rng) {
  const ComplexMatrix g = random_complex_matrix(n, n, rng);
  return hermitian_part(g * g.adjoint());
}

// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
// diagonal moved into Q.
inline ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
  const Eigen::MatrixXcd g = random_complex_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const Complex diag = r(i, i);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(i) *= diag / mag;
  }
  return q;
}

// d exponential weights, normalized and sorted; coefficients are their roots.
inline ResourceSpectrum random_spectrum(std::size_t d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(d);
  for (auto& x : w) x = e(rng);
  return ResourceSpectrum::from_weights(w, /*normalize=*/true);
}

// Weyl basis conjugated by a Haar-random unitary on B1.
inline MaxEntBasis random_basis(std::size_t d, Rng& rng) {
  return weyl_basis(d).conjugated(random_unitary(d, rng));
}

}  // namespace entdist
