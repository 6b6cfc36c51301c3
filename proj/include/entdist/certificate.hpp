#pragma once

// Analytic dual-feasible operator for the PPT discrimination SDP and the
// numerical checks of every positivity claim it rests on.
//
// The certificate is assembled on the factored ordering A1 B1 A2 B2 as
//
//   HH = (1/d^3) 1_{A1 B1} (x) [ tau + 2 sum_{i<j} a_i a_j T_{A2}(psi-_ij) ]
//
// and moved to the A:B ordering A1 A2 B1 B2 with the B1 <-> A2 swap. For an
// ensemble of n < d^2 states with priors 1/n it is scaled by d^2 / n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "entdist/measures.hpp"
#include "entdist/states.hpp"
#include "entdist/tensor.hpp"

namespace entdist {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kSpectrumCheckTol = 1e-10;

// Projectors on A2 (x) B2 built from the computational basis, plus the
// k-dependent operators Upsilon_k on A1 (x) B1.
struct CertificateParts {
  std::size_t dim = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // i < j, lexicographic
  std::vector<ComplexMatrix> antisym;                      // psi-_ij, aligned with pairs
  std::vector<ComplexMatrix> sym;                          // psi+_ij, aligned with pairs
  std::vector<ComplexMatrix> diag;                         // psi_ii
  ComplexMatrix gamma_op;                                  // sum a_i^2 psi_ii + sum a_i a_j psi+_ij
  std::vector<ComplexMatrix> upsilons;                     // 1 - d T_{A1}(Psi_k)
};

namespace detail {

inline Ket basis_ket(std::size_t d, std::size_t i, std::size_t j) {
  Ket v = Ket::Zero(static_cast<Eigen::Index>(d * d));
  v(static_cast<Eigen::Index>(i * d + j)) = 1.0;
  return v;
}

}  // namespace detail

inline ComplexMatrix upsilon(const ComplexMatrix& u) {
  const auto d = static_cast<std::size_t>(u.rows());
  const auto layout = SubsystemLayout::uniform(d, 2, 1);
  return identity(d * d) -
         static_cast<double>(d) * partial_transpose(density(max_ent_state(u)), layout, {0});
}

inline CertificateParts build_certificate_parts(const MaxEntBasis& basis,
                                                const ResourceSpectrum& spec) {
  const std::size_t d = basis.dim();
  if (spec.dim() != d) throw InputError("certificate: basis and spectrum dimensions differ");
  CertificateParts parts;
  parts.dim = d;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  parts.gamma_op = ComplexMatrix::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d));
  for (std::size_t i = 0; i < d; ++i) {
    parts.diag.push_back(density(detail::basis_ket(d, i, i)));
    parts.gamma_op += spec[i] * spec[i] * parts.diag.back();
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const Ket ij = detail::basis_ket(d, i, j);
      const Ket ji = detail::basis_ket(d, j, i);
      parts.pairs.emplace_back(i, j);
      parts.antisym.push_back(density(inv_sqrt2 * (ij - ji)));
      parts.sym.push_back(density(inv_sqrt2 * (ij + ji)));
      parts.gamma_op += spec[i] * spec[j] * parts.sym.back();
    }
  }
  parts.upsilons.reserve(basis.size());
  for (const auto& u : basis.unitaries()) parts.upsilons.push_back(upsilon(u));
  return parts;
}

struct DualCertificate {
  std::size_t dim = 0;
  std::size_t n_states = 0;
  double scale = 1.0;          // d^2 / n_states
  ComplexMatrix h_factored;    // on A1 B1 A2 B2
  ComplexMatrix h_swapped;     // on A1 A2 B1 B2
  double trace_value = 0.0;
  double fef = 0.0;
  SubsystemLayout layout = SubsystemLayout::uniform(2, 4, 2);  // of h_swapped
  CertificateParts parts;
  std::vector<double> coeffs;  // Schmidt coefficients of the resource
};

inline DualCertificate build_certificate(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                         std::size_t n_states) {
  const std::size_t d = basis.dim();
  if (n_states < 1 || n_states > d * d) {
    throw InputError("build_certificate: number of states must lie in [1, d^2]");
  }
  DualCertificate cert;
  cert.dim = d;
  cert.n_states = n_states;
  cert.scale = static_cast<double>(d * d) / static_cast<double>(n_states);
  cert.parts = build_certificate_parts(basis, spec);
  cert.coeffs = spec.coeffs();
  cert.fef = fef(spec);

  const auto pair_layout = SubsystemLayout::uniform(d, 2, 1);
  ComplexMatrix inner = density(resource_state(spec));
  for (std::size_t p = 0; p < cert.parts.pairs.size(); ++p) {
    const auto [i, j] = cert.parts.pairs[p];
    inner += 2.0 * spec[i] * spec[j] * partial_transpose(cert.parts.antisym[p], pair_layout, {0});
  }
  const double prefactor = cert.scale / static_cast<double>(d * d * d);
  cert.h_factored = prefactor * kron(identity(d * d), inner);
  const auto factored = SubsystemLayout::uniform(d, 4, 2);
  cert.h_swapped = permute_factors(cert.h_factored, factored, kSwapB1A2);
  cert.layout = SubsystemLayout::uniform(d, 4, 2);
  cert.trace_value = cert.h_factored.trace().real();

  if (!is_hermitian(cert.h_factored) || !is_hermitian(cert.h_swapped)) {
    throw NumericalError("build_certificate: certificate is not Hermitian");
  }
  if (std::abs(cert.h_swapped.trace().real() - cert.trace_value) > 1e-12) {
    throw NumericalError("build_certificate: swap changed the trace");
  }
  if (std::abs(cert.trace_value - cert.scale * cert.fef) > 1e-12 * cert.scale) {
    throw NumericalError("build_certificate: trace " + std::to_string(cert.trace_value) +
                         " differs from scaled fully entangled fraction");
  }
  return cert;
}

inline DualCertificate build_certificate(const MaxEntBasis& basis, const ResourceSpectrum& spec) {
  return build_certificate(basis, spec, basis.size());
}

struct FeasibilityReport {
  std::vector<double> min_eigenvalues;          // lambda_min(T_A(H - p_k Phi_k)) per k
  std::vector<double> decomposition_residuals;  // ||LHS - RHS||_F of the term-wise expansion
  double trace_value = 0.0;
  double tol = kFeasibilityTol;
  double threshold = 0.0;                       // -tol * (1 + ||H||_F)
  double worst_min_eigenvalue = 0.0;
  double max_decomposition_residual = 0.0;
  bool passed = false;
};

// Checks T_A(H - p_k Phi_k) >= 0 for every k, and that the partially transposed
// factored operator equals
//   (1/d^3) Upsilon_k (x) Gamma + (2/d^3) sum_{i<j} a_i a_j (1 - Upsilon_k / 2) (x) psi-_ij.
inline FeasibilityReport verify_dual_feasibility(const DualCertificate& cert, const Ensemble& ens,
                                                 double tol = kFeasibilityTol) {
  if (ens.dim != cert.dim || !(ens.layout == cert.layout)) {
    throw InputError("verify_dual_feasibility: ensemble and certificate layouts differ");
  }
  if (ens.size() != cert.n_states) {
    throw InputError("verify_dual_feasibility: certificate built for " +
                     std::to_string(cert.n_states) + " states, ensemble has " +
                     std::to_string(ens.size()));
  }
  const std::size_t d = cert.dim;
  const double d3 = static_cast<double>(d * d * d);
  const auto factored = SubsystemLayout::uniform(d, 4, 2);
  const ComplexMatrix unscaled = cert.h_factored / cert.scale;
  const ComplexMatrix id_pair = identity(d * d);

  FeasibilityReport report;
  report.tol = tol;
  report.trace_value = cert.trace_value;
  report.threshold = -tol * (1.0 + cert.h_swapped.norm());
  report.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ens.size(); ++k) {
    const ComplexMatrix phi = ens.density(k);
    const ComplexMatrix slack = partial_transpose_a(cert.h_swapped - ens.priors[k] * phi, ens.layout);
    const double lmin = min_eigenvalue(hermitian_part(slack));
    report.min_eigenvalues.push_back(lmin);
    report.worst_min_eigenvalue = std::min(report.worst_min_eigenvalue, lmin);

    const ComplexMatrix psi_tau = permute_factors(phi, ens.layout, kSwapB1A2);
    const ComplexMatrix lhs = partial_transpose(unscaled - psi_tau / static_cast<double>(d * d),
                                                factored, {0, 2});
    const auto& ups = cert.parts.upsilons.at(k);
    ComplexMatrix rhs = kron(ups, cert.parts.gamma_op) / d3;
    for (std::size_t p = 0; p < cert.parts.pairs.size(); ++p) {
      const auto [i, j] = cert.parts.pairs[p];
      rhs += (2.0 * cert.coeffs[i] * cert.coeffs[j] / d3) *
             kron(id_pair - 0.5 * ups, cert.parts.antisym[p]);
    }
    const double resid = (lhs - rhs).norm();
    report.decomposition_residuals.push_back(resid);
    report.max_decomposition_residual = std::max(report.max_decomposition_residual, resid);
  }
  report.passed = report.worst_min_eigenvalue >= report.threshold;
  return report;
}

struct UpsilonReport {
  std::size_t dim = 0;
  std::size_t zero_multiplicity = 0;  // d(d+1)/2
  std::size_t two_multiplicity = 0;   // d(d-1)/2
  std::vector<double> upsilon_spectrum_error;     // max |lambda - expected| for Upsilon_k
  std::vector<double> complement_spectrum_error;  // same for 1 - Upsilon_k / 2
  std::vector<double> upsilon_min_eigenvalues;
  std::vector<double> complement_min_eigenvalues;
  double max_error = 0.0;
  bool passed = false;
};

inline UpsilonReport upsilon_spectrum_check(const MaxEntBasis& basis,
                                            double tol = kSpectrumCheckTol) {
  const std::size_t d = basis.dim();
  UpsilonReport report;
  report.dim = d;
  report.zero_multiplicity = d * (d + 1) / 2;
  report.two_multiplicity = d * (d - 1) / 2;
  const ComplexMatrix id = identity(d * d);
  for (const auto& u : basis.unitaries()) {
    const ComplexMatrix ups = hermitian_part(upsilon(u));
    const RealVector ev = herm_eigenvalues(ups);
    const RealVector cv = herm_eigenvalues(hermitian_part(id - 0.5 * ups));
    double err_u = 0.0;
    double err_c = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const bool low = static_cast<std::size_t>(i) < report.zero_multiplicity;
      err_u = std::max(err_u, std::abs(ev(i) - (low ? 0.0 : 2.0)));
      const bool clow = static_cast<std::size_t>(i) < report.two_multiplicity;
      err_c = std::max(err_c, std::abs(cv(i) - (clow ? 0.0 : 1.0)));
    }
    report.upsilon_spectrum_error.push_back(err_u);
    report.complement_spectrum_error.push_back(err_c);
    report.upsilon_min_eigenvalues.push_back(ev(0));
    report.complement_min_eigenvalues.push_back(cv(0));
    report.max_error = std::max({report.max_error, err_u, err_c});
  }
  report.passed = report.max_error < tol;
  return report;
}

// Residuals of the algebraic identities the positivity argument uses on A2 (x) B2.
struct CertificateIdentities {
  double transposed_resource_residual = 0.0;  // ||T_{A2}(tau) - (Gamma - sum a_i a_j psi-_ij)||_F
  double identity_resolution_residual = 0.0;  // ||1 - sum psi_ii - sum psi+ - sum psi-||_F
  double gamma_min_eigenvalue = 0.0;
};

inline CertificateIdentities check_certificate_identities(const CertificateParts& parts,
                                                          const ResourceSpectrum& spec) {
  const std::size_t d = parts.dim;
  const auto layout = SubsystemLayout::uniform(d, 2, 1);
  CertificateIdentities out;
  ComplexMatrix rebuilt = parts.gamma_op;
  ComplexMatrix resolution = identity(d * d);
  for (const auto& p : parts.diag) resolution -= p;
  for (std::size_t p = 0; p < parts.pairs.size(); ++p) {
    const auto [i, j] = parts.pairs[p];
    rebuilt -= spec[i] * spec[j] * parts.antisym[p];
    resolution -= parts.sym[p] + parts.antisym[p];
  }
  out.transposed_resource_residual =
      (partial_transpose(density(resource_state(spec)), layout, {0}) - rebuilt).norm();
  out.identity_resolution_residual = resolution.norm();
  out.gamma_min_eigenvalue = min_eigenvalue(parts.gamma_op);
  return out;
}

// || U[(T_X1 (x) T_X2)(L (x) X)]U^dag - T_X[U (L (x) X) U^dag] ||_F with U the
// Y1 <-> X2 swap. Both sides are computed through separate code paths.
inline double check_swap_transpose_identity(const ComplexMatrix& lambda, const ComplexMatrix& xi) {
  if (lambda.rows() != lambda.cols() || xi.rows() != xi.cols() || lambda.rows() != xi.rows()) {
    throw InputError("check_swap_transpose_identity: operators must be square of equal dimension");
  }
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(lambda.rows()))));
  if (d * d != static_cast<std::size_t>(lambda.rows()) || d < 1) {
    throw InputError("check_swap_transpose_identity: dimension must be a perfect square d^2");
  }
  const auto factored = SubsystemLayout::uniform(d, 4, 2);
  const ComplexMatrix joint = kron(lambda, xi);
  const ComplexMatrix lhs = permute_factors(partial_transpose(joint, factored, {0, 2}), factored, kSwapB1A2);
  const auto swapped_layout = SubsystemLayout::uniform(d, 4, 2);
  const ComplexMatrix rhs = partial_transpose_a(permute_factors(joint, factored, kSwapB1A2), swapped_layout);
  return (lhs - rhs).norm();
}

}  // namespace entdist
