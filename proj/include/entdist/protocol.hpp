#pragma once

// Teleportation-based LOCC protocol, simulated on state vectors.
//
// After Alice teleports her half of |tau> through the unknown |Psi_i> and Bob
// corrects, Bob holds |gamma_i> = (1_{B2} (x) U_i)|tau> on B2 (x) B1 and measures
// in the basis {(1 (x) U_j)|Psi_1>}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "entdist/measures.hpp"
#include "entdist/states.hpp"

namespace entdist {

inline constexpr double kGramTol = 1e-12;
inline constexpr double kProtocolTol = 1e-10;

struct ResidualEnsemble {
  std::vector<Ket> gammas;       // |gamma_i> on B2 (x) B1
  ComplexMatrix gram;            // <gamma_i|gamma_j> from the kets
  ComplexMatrix gram_formula;    // sum_k a_k^2 <k|U_i^dag U_j|k>
  double cross_check_residual = 0.0;  // max |gram - gram_formula|
};

// (1 (x) U)|tau>: entry (k, j) = a_k U[j, k].
inline Ket teleported_state(const ComplexMatrix& u, const ResourceSpectrum& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Ket v = Ket::Zero(d * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) v(k * d + j) = spec[static_cast<std::size_t>(k)] * u(j, k);
  }
  return v;
}

inline ResidualEnsemble teleport_residuals(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                           std::size_t n) {
  const std::size_t d = basis.dim();
  if (spec.dim() != d) throw InputError("teleport_residuals: basis and spectrum dimensions differ");
  if (n < 1 || n > d * d) throw InputError("teleport_residuals: number of states must lie in [1, d^2]");
  ResidualEnsemble out;
  for (std::size_t i = 0; i < n; ++i) out.gammas.push_back(teleported_state(basis.unitary(i), spec));
  const auto m = static_cast<Eigen::Index>(n);
  out.gram.resize(m, m);
  out.gram_formula.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out.gram(i, j) = out.gammas[static_cast<std::size_t>(i)].dot(out.gammas[static_cast<std::size_t>(j)]);
      const ComplexMatrix prod =
          basis.unitary(static_cast<std::size_t>(i)).adjoint() * basis.unitary(static_cast<std::size_t>(j));
      Complex acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += spec[k] * spec[k] * prod(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      }
      out.gram_formula(i, j) = acc;
    }
  }
  out.cross_check_residual = (out.gram - out.gram_formula).cwiseAbs().maxCoeff();
  const double diag_err = (out.gram.diagonal().array() - 1.0).abs().maxCoeff();
  if (out.cross_check_residual > kGramTol || diag_err > kGramTol) {
    throw NumericalError("teleport_residuals: Gram matrix cross-check failed (residual " +
                         std::to_string(out.cross_check_residual) + ")");
  }
  return out;
}

struct ProtocolReport {
  std::vector<double> per_term;  // |<Psi_i|gamma_i>|^2
  double success = 0.0;          // (1/d^2) sum_i per_term[i]
  double fef = 0.0;
  double max_term_deviation = 0.0;  // max_i |per_term[i] - fef|
};

inline ProtocolReport protocol_success(const MaxEntBasis& basis, const ResourceSpectrum& spec) {
  const auto residuals = teleport_residuals(basis, spec, basis.size());
  ProtocolReport report;
  report.fef = fef(spec);
  double total = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = std::norm(max_ent_state(basis.unitary(i)).dot(residuals.gammas[i]));
    report.per_term.push_back(p);
    report.max_term_deviation = std::max(report.max_term_deviation, std::abs(p - report.fef));
    total += p;
  }
  report.success = total / static_cast<double>(basis.size());
  if (std::abs(report.success - report.fef) > kProtocolTol) {
    throw NumericalError("protocol_success: simulated success " + std::to_string(report.success) +
                         " differs from the fully entangled fraction");
  }
  return report;
}

struct SampledProtocol {
  std::uint64_t shots = 0;
  std::uint64_t successes = 0;
  double frequency = 0.0;
};

// Monte-Carlo run of the protocol: draw i uniformly, draw Bob's outcome j from
// |<Psi_j|gamma_i>|^2, count j == i.
inline SampledProtocol sample_protocol(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                       std::uint64_t shots, std::uint64_t seed) {
  const auto residuals = teleport_residuals(basis, spec, basis.size());
  const std::size_t n = basis.size();
  std::vector<Ket> outcomes;
  outcomes.reserve(n);
  for (const auto& u : basis.unitaries()) outcomes.push_back(max_ent_state(u));
  std::vector<std::discrete_distribution<std::size_t>> outcome_dist;
  outcome_dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> probs(n);
    for (std::size_t j = 0; j < n; ++j) probs[j] = std::norm(outcomes[j].dot(residuals.gammas[i]));
    outcome_dist.emplace_back(probs.begin(), probs.end());
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  SampledProtocol out;
  out.shots = shots;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const std::size_t i = pick(rng);
    if (outcome_dist[i](rng) == i) ++out.successes;
  }
  out.frequency = shots ? static_cast<double>(out.successes) / static_cast<double>(shots) : 0.0;
  return out;
}

// Extra measurement outcomes completing {Psi_1..Psi_N} to a basis of B2 (x) B1.
struct CompletionStates {
  std::size_t n_states = 0;
  std::vector<Ket> kets;
};

inline CompletionStates default_completion(const MaxEntBasis& basis, std::size_t n) {
  const std::size_t total = basis.size();
  if (n >= total) throw InputError("default_completion: basis is already complete (N = d^2)");
  if (n < 1) throw InputError("default_completion: N must be >= 1");
  CompletionStates out;
  out.n_states = n;
  for (std::size_t k = n; k < total; ++k) out.kets.push_back(max_ent_state(basis.unitary(k)));
  return out;
}

// Max |<psi'_i|psi'_j> - delta_ij| and max |<psi'_i|Psi_k>| for k <= N.
inline std::pair<double, double> completion_defects(const MaxEntBasis& basis,
                                                    const CompletionStates& completion) {
  double ortho = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < completion.kets.size(); ++i) {
    for (std::size_t j = 0; j < completion.kets.size(); ++j) {
      const Complex ip = completion.kets[i].dot(completion.kets[j]);
      ortho = std::max(ortho, std::abs(ip - (i == j ? 1.0 : 0.0)));
    }
    for (std::size_t k = 0; k < completion.n_states; ++k) {
      cross = std::max(cross, std::abs(completion.kets[i].dot(max_ent_state(basis.unitary(k)))));
    }
  }
  return {ortho, cross};
}

enum class CompletionStrategy { completion, projector };

inline std::string to_string(CompletionStrategy s) {
  return s == CompletionStrategy::completion ? "completion" : "projector";
}

struct IncompleteBounds {
  std::size_t n_states = 0;
  CompletionStrategy strategy = CompletionStrategy::completion;
  double fef = 0.0;
  double first_term = 0.0;             // (1/N) sum_{i<=N} |<Psi_i|gamma_i>|^2
  std::vector<double> best_overlaps;   // per completion state (or the single projector outcome)
  std::vector<std::size_t> chosen;     // argmax_j, lowest index on ties (0-based)
  double lower = 0.0;
  double upper = 0.0;                  // min(1, d^2 F / N)
  bool in_bounded_regime = true;         // d + 1 <= N <= d^2
};

namespace detail {

// Lowest index wins ties; values within kTieTol of the incumbent count as tied.
inline constexpr double kTieTol = 1e-12;

inline std::pair<double, std::size_t> best_overlap(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best] + kTieTol) best = j;
  }
  return {values[best], best};
}

}  // namespace detail

inline IncompleteBounds incomplete_bounds(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                          std::size_t n, const CompletionStates& completion,
                                          CompletionStrategy strategy = CompletionStrategy::completion) {
  const std::size_t d = basis.dim();
  if (n < 1 || n > d * d) throw InputError("incomplete_bounds: number of states must lie in [1, d^2]");
  if (completion.n_states != n || completion.kets.size() != d * d - n) {
    throw InputError("incomplete_bounds: completion is inconsistent with N");
  }
  const auto [ortho, cross] = completion_defects(basis, completion);
  if (ortho > kBasisTol || cross > kBasisTol) {
    throw InputError("incomplete_bounds: completion states are not orthonormal to Psi_1..Psi_N");
  }
  const auto residuals = teleport_residuals(basis, spec, n);

  IncompleteBounds out;
  out.n_states = n;
  out.strategy = strategy;
  out.fef = fef(spec);
  out.in_bounded_regime = n >= d + 1;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.first_term += std::norm(max_ent_state(basis.unitary(i)).dot(residuals.gammas[i]));
  }
  out.first_term *= inv_n;

  double second = 0.0;
  if (strategy == CompletionStrategy::completion) {
    for (const auto& extra : completion.kets) {
      std::vector<double> overlaps;
      for (const auto& g : residuals.gammas) overlaps.push_back(std::norm(extra.dot(g)));
      const auto [value, j] = detail::best_overlap(overlaps);
      out.best_overlaps.push_back(value);
      out.chosen.push_back(j);
      second += value;
    }
  } else if (n < d * d) {
    // Q projects onto the orthocomplement of span{Psi_1..Psi_N}.
    std::vector<double> weights;
    for (const auto& g : residuals.gammas) {
      double w = g.squaredNorm();
      for (std::size_t k = 0; k < n; ++k) w -= std::norm(max_ent_state(basis.unitary(k)).dot(g));
      weights.push_back(w);
    }
    const auto [value, j] = detail::best_overlap(weights);
    out.best_overlaps.push_back(value);
    out.chosen.push_back(j);
    second = value;
  }
  out.lower = out.first_term + inv_n * second;
  out.upper = std::min(1.0, static_cast<double>(d * d) * inv_n * out.fef);
  if (out.lower > out.upper + kProtocolTol) {
    throw NumericalError("incomplete_bounds: lower bound exceeds upper bound");
  }
  return out;
}

inline IncompleteBounds incomplete_bounds(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                          std::size_t n,
                                          CompletionStrategy strategy = CompletionStrategy::completion) {
  const CompletionStates completion =
      n < basis.size() ? default_completion(basis, n) : CompletionStates{n, {}};
  return incomplete_bounds(basis, spec, n, completion, strategy);
}

}  // namespace entdist
