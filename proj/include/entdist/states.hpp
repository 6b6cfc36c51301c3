#pragma once

// Maximally entangled bases, resource states and the discrimination ensembles
// on the A:B bipartition.
//
// Factor conventions:
//   unknown state  |Psi_k> on A1 (x) B1
//   resource       |tau>   on A2 (x) B2
//   ensemble       |Phi_k> on A1 (x) A2 (x) B1 (x) B2   (cut after two factors)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "entdist/tensor.hpp"

namespace entdist {

inline constexpr double kBasisTol = 1e-10;
inline constexpr double kSpectrumTol = 1e-12;

// Swap B1 <-> A2: (A1, B1, A2, B2) -> (A1, A2, B1, B2). Self-inverse.
inline constexpr std::size_t kSwapB1A2[4] = {0, 2, 1, 3};

// Ordered Schmidt coefficients a_1 >= ... >= a_d >= 0 with sum a_i^2 = 1.
class ResourceSpectrum {
 public:
  explicit ResourceSpectrum(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) throw InputError("ResourceSpectrum: need d >= 2 coefficients");
    double norm2 = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (!std::isfinite(coeffs_[i]) || coeffs_[i] < 0.0) {
        throw InputError("ResourceSpectrum: coefficients must be finite and non-negative");
      }
      if (i > 0 && coeffs_[i] > coeffs_[i - 1]) {
        throw InputError("ResourceSpectrum: coefficients must be sorted in descending order");
      }
      norm2 += coeffs_[i] * coeffs_[i];
    }
    if (std::abs(norm2 - 1.0) > kSpectrumTol) {
      throw InputError("ResourceSpectrum: squared coefficients sum to " + std::to_string(norm2) +
                       ", expected 1");
    }
  }

  // From squared weights (probabilities). With `normalize`, weights are rescaled
  // to sum to one and sorted; otherwise they must already satisfy the invariants.
  static ResourceSpectrum from_weights(std::span<const double> weights, bool normalize = false) {
    std::vector<double> w(weights.begin(), weights.end());
    for (double x : w) {
      if (!std::isfinite(x) || x < 0.0) throw InputError("ResourceSpectrum: weights must be >= 0");
    }
    if (normalize) prepare(w);
    std::vector<double> a(w.size());
    std::transform(w.begin(), w.end(), a.begin(), [](double x) { return std::sqrt(x); });
    return ResourceSpectrum(std::move(a));
  }

  static ResourceSpectrum from_amplitudes(std::span<const double> amplitudes,
                                          bool normalize = false) {
    std::vector<double> a(amplitudes.begin(), amplitudes.end());
    if (normalize) {
      for (double x : a) {
        if (!std::isfinite(x) || x < 0.0) {
          throw InputError("ResourceSpectrum: amplitudes must be >= 0");
        }
      }
      std::vector<double> w(a.size());
      std::transform(a.begin(), a.end(), w.begin(), [](double x) { return x * x; });
      prepare(w);
      std::transform(w.begin(), w.end(), a.begin(), [](double x) { return std::sqrt(x); });
    }
    return ResourceSpectrum(std::move(a));
  }

  static ResourceSpectrum uniform(std::size_t d) {
    return ResourceSpectrum(std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d))));
  }

  static ResourceSpectrum product(std::size_t d) {
    std::vector<double> a(d, 0.0);
    a.at(0) = 1.0;
    return ResourceSpectrum(std::move(a));
  }

  std::size_t dim() const { return coeffs_.size(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }

 private:
  static void prepare(std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw InputError("ResourceSpectrum: weights sum to zero");
    for (double& x : w) x /= total;
    std::sort(w.begin(), w.end(), std::greater<>());
  }

  std::vector<double> coeffs_;
};

struct BasisValidation {
  std::size_t dim = 0;
  std::size_t count = 0;
  double unitarity_defect = 0.0;     // max_j ||U_j^dag U_j - 1||_max
  double orthogonality_defect = 0.0; // max_{i,j} |Tr(U_i^dag U_j) - d delta_ij|
  double identity_defect = 0.0;      // ||U_1 - 1||_max
  bool complete = false;             // count == d^2
  bool accepted = false;             // both defects below kBasisTol
};

inline BasisValidation validate_basis(std::span<const ComplexMatrix> unitaries) {
  if (unitaries.empty()) throw InputError("validate_basis: empty list of unitaries");
  const Eigen::Index d = unitaries.front().rows();
  for (const auto& u : unitaries) {
    if (u.rows() != d || u.cols() != d) {
      throw InputError("validate_basis: unitaries must be square with equal dimensions");
    }
  }
  BasisValidation report;
  report.dim = static_cast<std::size_t>(d);
  report.count = unitaries.size();
  report.complete = report.count == report.dim * report.dim;
  const ComplexMatrix id = identity(report.dim);
  report.identity_defect = (unitaries.front() - id).cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < unitaries.size(); ++i) {
    const ComplexMatrix gram = unitaries[i].adjoint() * unitaries[i];
    report.unitarity_defect = std::max(report.unitarity_defect, (gram - id).cwiseAbs().maxCoeff());
    for (std::size_t j = 0; j < unitaries.size(); ++j) {
      const Complex t = (unitaries[i].adjoint() * unitaries[j]).trace();
      const double expected = i == j ? static_cast<double>(d) : 0.0;
      report.orthogonality_defect = std::max(report.orthogonality_defect, std::abs(t - expected));
    }
  }
  report.accepted = report.unitarity_defect < kBasisTol && report.orthogonality_defect < kBasisTol;
  return report;
}

// d^2 unitaries U_1 = 1, ..., U_{d^2} with Tr(U_i^dag U_j) = d delta_ij, defining
// |Psi_j> = (1 (x) U_j)|Psi_1>.
class MaxEntBasis {
 public:
  explicit MaxEntBasis(std::vector<ComplexMatrix> unitaries) : unitaries_(std::move(unitaries)) {
    const auto report = validate_basis(unitaries_);
    if (!report.accepted) {
      throw InputError("MaxEntBasis: unitaries fail validation (unitarity defect " +
                       std::to_string(report.unitarity_defect) + ", orthogonality defect " +
                       std::to_string(report.orthogonality_defect) + ")");
    }
    if (!report.complete) {
      throw InputError("MaxEntBasis: expected d^2 = " + std::to_string(report.dim * report.dim) +
                       " unitaries, got " + std::to_string(report.count));
    }
    if (report.dim < 2) throw InputError("MaxEntBasis: dimension must be >= 2");
    if (report.identity_defect > kBasisTol) {
      throw InputError("MaxEntBasis: first unitary must be the identity");
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(unitaries_.front().rows()); }
  std::size_t size() const { return unitaries_.size(); }
  const ComplexMatrix& unitary(std::size_t k) const { return unitaries_.at(k); }
  const std::vector<ComplexMatrix>& unitaries() const { return unitaries_; }

  // V U_j V^dag for every j. Keeps U_1 = 1; equivalent to the local unitary
  // conj(V) (x) V on A1 (x) B1, which fixes |Psi_1>.
  MaxEntBasis conjugated(const ComplexMatrix& v) const {
    std::vector<ComplexMatrix> out;
    out.reserve(unitaries_.size());
    for (const auto& u : unitaries_) out.push_back(v * u * v.adjoint());
    return MaxEntBasis(std::move(out));
  }

 private:
  std::vector<ComplexMatrix> unitaries_;
};

// Generalized Pauli (Weyl-Heisenberg) basis: U_{a*d + b} = X^a Z^b with X the
// cyclic shift and Z = diag(1, w, ..., w^{d-1}), w = exp(2 pi i / d).
inline MaxEntBasis weyl_basis(std::size_t d) {
  if (d < 2) throw InputError("weyl_basis: dimension must be >= 2");
  const auto n = static_cast<Eigen::Index>(d);
  // Phases w^m for m = 0..d-1, with components that are exactly zero snapped.
  std::vector<Complex> phase(d);
  for (std::size_t m = 0; m < d; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(d);
    double re = std::cos(angle);
    double im = std::sin(angle);
    if (std::abs(re) < 1e-15) re = 0.0;
    if (std::abs(im) < 1e-15) im = 0.0;
    phase[m] = {re, im};
  }
  std::vector<ComplexMatrix> unitaries;
  unitaries.reserve(d * d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      // X^a Z^b |c> = w^{bc} |c + a mod d>
      ComplexMatrix u = ComplexMatrix::Zero(n, n);
      for (std::size_t c = 0; c < d; ++c) {
        u(static_cast<Eigen::Index>((c + a) % d), static_cast<Eigen::Index>(c)) = phase[(b * c) % d];
      }
      unitaries.push_back(std::move(u));
    }
  }
  return MaxEntBasis(std::move(unitaries));
}

// (1 (x) U)|Psi_1>, |Psi_1> = d^{-1/2} sum_i |i>|i>.
inline Ket max_ent_state(const ComplexMatrix& u) {
  if (u.rows() != u.cols() || u.rows() < 1) throw InputError("max_ent_state: U must be square");
  const Eigen::Index d = u.rows();
  if ((u.adjoint() * u - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kBasisTol) {
    throw InputError("max_ent_state: U is not unitary");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Ket v = Ket::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = scale * u(j, i);
  }
  return v;
}

// sum_i a_i |i>|i> on A2 (x) B2.
inline Ket resource_state(const ResourceSpectrum& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Ket v = Ket::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = spec[static_cast<std::size_t>(i)];
  return v;
}

// Descending singular values of the coefficient matrix of v across the cut.
inline std::vector<double> schmidt_coefficients(const Ket& v, const SubsystemLayout& layout) {
  if (v.size() != static_cast<Eigen::Index>(layout.total_dim())) {
    throw InputError("schmidt_coefficients: ket dimension does not match layout");
  }
  const auto da = static_cast<Eigen::Index>(layout.party_a_dim());
  const auto db = static_cast<Eigen::Index>(layout.party_b_dim());
  Eigen::MatrixXcd coeff(da, db);
  for (Eigen::Index a = 0; a < da; ++a) {
    for (Eigen::Index b = 0; b < db; ++b) coeff(a, b) = v(a * db + b);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(coeff);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

// States |Phi_k> on A1 A2 B1 B2 with priors. Priors other than uniform are
// representable, but no closed-form result covers them.
struct Ensemble {
  std::size_t dim = 0;
  SubsystemLayout layout = SubsystemLayout::uniform(2, 4, 2);
  std::vector<Ket> states;
  std::vector<double> priors;
  bool uniform_priors = true;

  std::size_t size() const { return states.size(); }
  ComplexMatrix density(std::size_t k) const { return entdist::density(states.at(k)); }
};

inline void check_ensemble_invariants(const Ensemble& ens) {
  if (ens.states.size() != ens.priors.size() || ens.states.empty()) {
    throw NumericalError("Ensemble: states and priors must be non-empty and of equal length");
  }
  double total = 0.0;
  for (double p : ens.priors) {
    if (p < 0.0) throw InputError("Ensemble: priors must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > kSpectrumTol) throw InputError("Ensemble: priors must sum to 1");
  for (std::size_t i = 0; i < ens.states.size(); ++i) {
    if (std::abs(ens.states[i].norm() - 1.0) > 1e-12) {
      throw NumericalError("Ensemble: state " + std::to_string(i) + " is not normalized");
    }
    for (std::size_t j = i + 1; j < ens.states.size(); ++j) {
      if (std::abs(ens.states[i].dot(ens.states[j])) > kBasisTol) {
        throw NumericalError("Ensemble: states " + std::to_string(i) + " and " + std::to_string(j) +
                             " are not orthogonal");
      }
    }
  }
}

// |Phi_k> = U_{B1<->A2}(|Psi_k> (x) |tau>) for the first n basis elements, priors 1/n.
inline Ensemble build_ensemble(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                               std::size_t n) {
  const std::size_t d = basis.dim();
  if (spec.dim() != d) throw InputError("build_ensemble: basis and spectrum dimensions differ");
  if (n < 1 || n > d * d) {
    throw InputError("build_ensemble: number of states must lie in [1, d^2]");
  }
  const auto factored = SubsystemLayout::uniform(d, 4, 2);
  const Ket tau = resource_state(spec);
  Ensemble ens;
  ens.dim = d;
  ens.layout = SubsystemLayout::uniform(d, 4, 2);
  ens.states.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ens.states.push_back(permute_ket(kron(max_ent_state(basis.unitary(k)), tau), factored, kSwapB1A2));
  }
  ens.priors.assign(n, 1.0 / static_cast<double>(n));
  check_ensemble_invariants(ens);
  return ens;
}

inline Ensemble with_priors(Ensemble ens, std::vector<double> priors) {
  if (priors.size() != ens.states.size()) {
    throw InputError("with_priors: one prior per state required");
  }
  ens.priors = std::move(priors);
  const double first = ens.priors.front();
  ens.uniform_priors = std::all_of(ens.priors.begin(), ens.priors.end(),
                                   [first](double p) { return std::abs(p - first) <= 1e-15; });
  check_ensemble_invariants(ens);
  return ens;
}

}  // namespace entdist
