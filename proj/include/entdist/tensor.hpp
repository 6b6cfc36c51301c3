#pragma once

// Dense complex linear algebra over tensor-product spaces.
//
// Operators are row-major dense matrices. A SubsystemLayout names the factor
// dimensions of the space (first factor most significant, matching kron) and
// the A:B cut. All functions are pure and single-threaded.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "entdist/errors.hpp"

namespace entdist {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Ket = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Relative Hermiticity tolerance: max|M - M^dag| <= tol * (1 + ||M||_F).
inline constexpr double kHermitianTol = 1e-12;
// Default PSD membership threshold: lambda_min >= -tol * (1 + ||M||_F).
inline constexpr double kPsdTol = 1e-9;

class SubsystemLayout {
 public:
  SubsystemLayout(std::vector<std::size_t> factor_dims, std::size_t cut)
      : dims_(std::move(factor_dims)), cut_(cut) {
    if (dims_.size() < 2) {
      throw InputError("SubsystemLayout: need at least two factors");
    }
    if (cut_ < 1 || cut_ >= dims_.size()) {
      throw InputError("SubsystemLayout: cut must satisfy 1 <= cut < number of factors");
    }
    for (std::size_t d : dims_) {
      if (d == 0) throw InputError("SubsystemLayout: factor dimensions must be positive");
    }
  }

  // `factors` copies of C^d, cut after `cut` factors.
  static SubsystemLayout uniform(std::size_t d, std::size_t factors, std::size_t cut) {
    return SubsystemLayout(std::vector<std::size_t>(factors, d), cut);
  }

  const std::vector<std::size_t>& factor_dims() const { return dims_; }
  std::size_t cut() const { return cut_; }
  std::size_t num_factors() const { return dims_.size(); }

  std::size_t total_dim() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t party_a_dim() const {
    return std::accumulate(dims_.begin(), dims_.begin() + static_cast<std::ptrdiff_t>(cut_),
                           std::size_t{1}, std::multiplies<>());
  }
  std::size_t party_b_dim() const { return total_dim() / party_a_dim(); }

  std::vector<std::size_t> party_a_factors() const {
    std::vector<std::size_t> out(cut_);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }

  // Stride of each factor in the flat index.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(dims_.size(), 1);
    for (std::size_t i = dims_.size() - 1; i > 0; --i) s[i - 1] = s[i] * dims_[i];
    return s;
  }

  bool operator==(const SubsystemLayout&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t cut_;
};

inline ComplexMatrix identity(std::size_t n) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

inline ComplexMatrix density(const Ket& v) { return v * v.adjoint(); }

inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol * (1.0 + m.norm());
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

// (A (x) B)[i*rB + k, j*cB + l] = A[i,j] * B[k,l]
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Ket kron(const Ket& a, const Ket& b) {
  Ket out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

namespace detail {

inline void check_square_layout(const ComplexMatrix& m, const SubsystemLayout& layout,
                                const char* who) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  if (m.rows() != n || m.cols() != n) {
    throw InputError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " but layout dimension is " + std::to_string(n));
  }
}

inline void check_permutation(std::span<const std::size_t> perm, std::size_t n, const char* who) {
  if (perm.size() != n) throw InputError(std::string(who) + ": permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw InputError(std::string(who) + ": not a permutation");
    seen[p] = true;
  }
}

// Flat index map old -> new when output factor i is input factor perm[i].
inline std::vector<Eigen::Index> permutation_index_map(const SubsystemLayout& layout,
                                                       std::span<const std::size_t> perm) {
  const auto& dims = layout.factor_dims();
  const auto old_strides = layout.strides();
  std::vector<std::size_t> new_strides(dims.size(), 1);
  for (std::size_t i = dims.size() - 1; i > 0; --i) {
    new_strides[i - 1] = new_strides[i] * dims[perm[i]];
  }
  const std::size_t n = layout.total_dim();
  std::vector<Eigen::Index> map(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const std::size_t digit = (idx / old_strides[perm[i]]) % dims[perm[i]];
      out += digit * new_strides[i];
    }
    map[idx] = static_cast<Eigen::Index>(out);
  }
  return map;
}

}  // namespace detail

// Transpose the listed factors in the computational basis, leaving the others untouched.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const SubsystemLayout& layout,
                                       std::span<const std::size_t> factors) {
  detail::check_square_layout(m, layout, "partial_transpose");
  const auto& dims = layout.factor_dims();
  const auto strides = layout.strides();
  for (std::size_t f : factors) {
    if (f >= dims.size()) throw InputError("partial_transpose: factor index out of range");
  }
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      auto r2 = static_cast<std::ptrdiff_t>(r);
      auto c2 = static_cast<std::ptrdiff_t>(c);
      for (std::size_t f : factors) {
        const auto s = static_cast<std::ptrdiff_t>(strides[f]);
        const auto n = static_cast<std::ptrdiff_t>(dims[f]);
        const std::ptrdiff_t rd = (r / s) % n;
        const std::ptrdiff_t cd = (c / s) % n;
        r2 += (cd - rd) * s;
        c2 += (rd - cd) * s;
      }
      out(r2, c2) = m(r, c);
    }
  }
  return out;
}

inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const SubsystemLayout& layout,
                                       std::initializer_list<std::size_t> factors) {
  return partial_transpose(m, layout, std::span<const std::size_t>(factors.begin(), factors.size()));
}

// Partial transpose over party A (factors before the cut).
inline ComplexMatrix partial_transpose_a(const ComplexMatrix& m, const SubsystemLayout& layout) {
  const auto fa = layout.party_a_factors();
  return partial_transpose(m, layout, fa);
}

// Reorder tensor factors: output factor i is input factor perm[i]. Equivalent to
// U_perm M U_perm^dag with U_perm the basis-ket permutation unitary.
inline ComplexMatrix permute_factors(const ComplexMatrix& m, const SubsystemLayout& layout,
                                     std::span<const std::size_t> perm) {
  detail::check_square_layout(m, layout, "permute_factors");
  detail::check_permutation(perm, layout.num_factors(), "permute_factors");
  const auto map = detail::permutation_index_map(layout, perm);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(map[r], map[c]) = m(r, c);
  }
  return out;
}

inline ComplexMatrix permute_factors(const ComplexMatrix& m, const SubsystemLayout& layout,
                                     std::initializer_list<std::size_t> perm) {
  return permute_factors(m, layout, std::span<const std::size_t>(perm.begin(), perm.size()));
}

inline Ket permute_ket(const Ket& v, const SubsystemLayout& layout,
                       std::span<const std::size_t> perm) {
  if (v.size() != static_cast<Eigen::Index>(layout.total_dim())) {
    throw InputError("permute_ket: ket dimension does not match layout");
  }
  detail::check_permutation(perm, layout.num_factors(), "permute_ket");
  const auto map = detail::permutation_index_map(layout, perm);
  Ket out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(map[i]) = v(i);
  return out;
}

inline std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

// Factor dimensions after permute_factors(., layout, perm).
inline std::vector<std::size_t> permuted_dims(const SubsystemLayout& layout,
                                              std::span<const std::size_t> perm) {
  std::vector<std::size_t> out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = layout.factor_dims()[perm[i]];
  return out;
}

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns are eigenvectors
};

namespace detail {

inline void require_hermitian(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols()) throw InputError(std::string(who) + ": matrix is not square");
  if (!is_hermitian(m)) {
    throw InputError(std::string(who) + ": matrix is not Hermitian (defect " +
                     std::to_string(hermiticity_defect(m)) + ")");
  }
}

}  // namespace detail

inline HermitianEigen herm_eig(const ComplexMatrix& m) {
  detail::require_hermitian(m, "herm_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector herm_eigenvalues(const ComplexMatrix& m) {
  detail::require_hermitian(m, "herm_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("herm_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& m) { return herm_eigenvalues(m)(0); }

inline bool is_psd(const ComplexMatrix& m, double tol = kPsdTol) {
  return min_eigenvalue(m) >= -tol * (1.0 + m.norm());
}

// Frobenius-nearest PSD matrix: clip negative eigenvalues at zero.
inline ComplexMatrix psd_project(const ComplexMatrix& m) {
  const auto eig = herm_eig(m);
  const RealVector clipped = eig.values.cwiseMax(0.0);
  ComplexMatrix out = eig.vectors * clipped.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return hermitian_part(out);
}

}  // namespace entdist
