#pragma once

// Primal PPT state-discrimination SDP
//
//   maximize   sum_i p_i Tr(rho_i P_i)
//   subject to sum_i P_i = 1,  P_i >= 0,  T_A(P_i) >= 0
//
// solved by ADMM on the splitting X_i (affine) = Y_i (PSD cone) = Z_i (PPT cone).
// The affine step has a closed form, the cone steps are eigenvalue clipping
// (for Z_i inside a partial transpose, which is a Frobenius isometry).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "entdist/certificate.hpp"
#include "entdist/parallel.hpp"
#include "entdist/protocol.hpp"
#include "entdist/states.hpp"
#include "entdist/tensor.hpp"

namespace entdist {

struct SolverOptions {
  double accuracy = 1e-4;
  std::size_t max_iterations = 50000;
  double step = 0.0;        // ADMM penalty; 0 selects 1 / (number of operators)
  double relaxation = 1.6;  // over-relaxation factor in (0, 2)
  std::size_t check_interval = 50;
  std::size_t trace_interval = 100;
  std::size_t threads = 0;  // 0: ENTDIST_THREADS or hardware concurrency
};

struct SDPProblem {
  std::vector<ComplexMatrix> states;
  std::vector<double> priors;
  SubsystemLayout layout;
  SolverOptions options;

  static SDPProblem from_ensemble(const Ensemble& ens, SolverOptions options = {}) {
    SDPProblem p{{}, ens.priors, ens.layout, options};
    p.states.reserve(ens.size());
    for (std::size_t k = 0; k < ens.size(); ++k) p.states.push_back(ens.density(k));
    return p;
  }
};

struct TracePoint {
  std::size_t iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double cone_residual = 0.0;
  double consensus_residual = 0.0;  // max_i max(||X_i - Y_i||_F, ||X_i - Z_i||_F)
};

struct SDPResult {
  double primal_value = 0.0;   // objective at the reported iterate
  double rounded_value = 0.0;  // objective after rounding to an exactly feasible measurement
  double dual_bound = 0.0;     // Tr(H) of a dual-feasible H built from the ADMM multipliers
  std::vector<ComplexMatrix> operators;          // iterate P_i (sum exactly 1)
  std::vector<ComplexMatrix> rounded_operators;  // feasible P_i
  double primal_residual = 0.0;  // ||sum P_i - 1||_F
  double cone_residual = 0.0;    // min(0, worst eigenvalue over P_i and T_A(P_i))
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

namespace detail {

inline void validate_problem(const SDPProblem& p) {
  if (p.states.empty() || p.states.size() != p.priors.size()) {
    throw InputError("solve_primal_ppt: need one prior per state and at least one state");
  }
  const auto n = static_cast<Eigen::Index>(p.layout.total_dim());
  double total = 0.0;
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    const auto& rho = p.states[i];
    if (rho.rows() != n || rho.cols() != n) throw InputError("solve_primal_ppt: state dimension mismatch");
    if (p.priors[i] < 0.0) throw InputError("solve_primal_ppt: negative prior");
    total += p.priors[i];
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || !is_hermitian(rho) ||
        min_eigenvalue(hermitian_part(rho)) < -1e-10) {
      throw InputError("solve_primal_ppt: state " + std::to_string(i) + " is not a density operator");
    }
  }
  if (std::abs(total - 1.0) > 1e-10) throw InputError("solve_primal_ppt: priors must sum to 1");
  const auto& o = p.options;
  if (!(o.accuracy > 0.0) || o.max_iterations == 0 || o.check_interval == 0 || o.step < 0.0 ||
      !(o.relaxation > 0.0 && o.relaxation < 2.0)) {
    throw InputError("solve_primal_ppt: invalid solver options");
  }
}

inline ComplexMatrix ppt_project(const ComplexMatrix& m, const SubsystemLayout& layout) {
  return partial_transpose_a(psd_project(partial_transpose_a(m, layout)), layout);
}

}  // namespace detail

inline double objective_value(const SDPProblem& p, const std::vector<ComplexMatrix>& ops) {
  double v = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    v += p.priors[i] * p.states[i].cwiseProduct(ops[i].conjugate()).sum().real();
  }
  return v;
}

// Worst eigenvalue over P_i and T_A(P_i), clipped above at zero.
inline double cone_residual(const std::vector<ComplexMatrix>& ops, const SubsystemLayout& layout,
                            std::size_t threads = 1) {
  std::vector<double> worst(ops.size());
  parallel_for(ops.size(), threads, [&](std::size_t i) {
    const double a = min_eigenvalue(hermitian_part(ops[i]));
    const double b = min_eigenvalue(hermitian_part(partial_transpose_a(ops[i], layout)));
    worst[i] = std::min(a, b);
  });
  double out = 0.0;
  for (double w : worst) out = std::min(out, w);
  return out;
}

inline double affine_residual(const std::vector<ComplexMatrix>& ops) {
  ComplexMatrix sum = -identity(static_cast<std::size_t>(ops.front().rows()));
  for (const auto& o : ops) sum += o;
  return sum.norm();
}

// Restore sum P_i = 1, shift each operator by eps_i * 1 so it lies in both
// cones (T_A(1) = 1), then renormalize; the sum stays exactly the identity.
inline std::vector<ComplexMatrix> round_to_feasible(const std::vector<ComplexMatrix>& ops,
                                                    const SubsystemLayout& layout,
                                                    std::size_t threads = 1) {
  const std::size_t n = static_cast<std::size_t>(ops.front().rows());
  const ComplexMatrix id = identity(n);
  ComplexMatrix sum = ComplexMatrix::Zero(ops.front().rows(), ops.front().cols());
  for (const auto& o : ops) sum += hermitian_part(o);
  const ComplexMatrix defect = (id - sum) / static_cast<double>(ops.size());
  std::vector<ComplexMatrix> out;
  out.reserve(ops.size());
  for (const auto& o : ops) out.push_back(hermitian_part(o) + defect);

  std::vector<double> eps(out.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const double a = min_eigenvalue(out[i]);
    const double b = min_eigenvalue(hermitian_part(partial_transpose_a(out[i], layout)));
    eps[i] = std::max(0.0, -std::min(a, b));
  });
  double total = 0.0;
  for (double e : eps) total += e;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] + eps[i] * id) / (1.0 + total);
  return out;
}

inline SDPResult solve_primal_ppt(const SDPProblem& problem) {
  detail::validate_problem(problem);
  const auto& opt = problem.options;
  const std::size_t n = problem.states.size();
  const std::size_t dim = problem.layout.total_dim();
  const double nd = static_cast<double>(n);
  const double rho = opt.step > 0.0 ? opt.step : 1.0 / nd;
  const double alpha = opt.relaxation;
  const std::size_t threads = resolve_threads(opt.threads);
  const ComplexMatrix id = identity(dim);
  const auto& layout = problem.layout;

  std::vector<ComplexMatrix> cost(n);
  for (std::size_t i = 0; i < n; ++i) cost[i] = problem.priors[i] * problem.states[i];

  std::vector<ComplexMatrix> x(n, id / nd), y(n, id / nd), z(n, id / nd);
  std::vector<ComplexMatrix> u(n, ComplexMatrix::Zero(dim, dim)), w(n, ComplexMatrix::Zero(dim, dim));
  std::vector<double> consensus(n, 0.0);

  SDPResult result;
  double previous_objective = objective_value(problem, x);
  std::size_t it = 0;
  while (it < opt.max_iterations) {
    // Affine step: minimize -<C_i, X_i> + rho/2 ||X_i - (Y_i - U_i)||^2 + rho/2 ||X_i - (Z_i - W_i)||^2
    // subject to sum X_i = 1. Fixed summation order keeps the step bit-exact.
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 0.5 * (y[i] - u[i] + z[i] - w[i]) + cost[i] / (2.0 * rho);
      sum += x[i];
    }
    const ComplexMatrix correction = (id - sum) / nd;
    for (std::size_t i = 0; i < n; ++i) x[i] += correction;

    parallel_for(n, threads, [&](std::size_t i) {
      const ComplexMatrix xy = alpha * x[i] + (1.0 - alpha) * y[i];
      const ComplexMatrix xz = alpha * x[i] + (1.0 - alpha) * z[i];
      y[i] = psd_project(hermitian_part(xy + u[i]));
      z[i] = detail::ppt_project(hermitian_part(xz + w[i]), layout);
      u[i] += xy - y[i];
      w[i] += xz - z[i];
      consensus[i] = std::max((x[i] - y[i]).norm(), (x[i] - z[i]).norm());
    });
    ++it;

    if (it % opt.check_interval == 0 || it == opt.max_iterations) {
      const double objective = objective_value(problem, x);
      const double change = std::abs(objective - previous_objective) / std::max(1.0, std::abs(objective));
      previous_objective = objective;
      const double primal = affine_residual(x);
      const double cone = cone_residual(x, layout, threads);
      if (it % opt.trace_interval == 0) {
        result.trace.push_back({it, objective, primal, cone,
                                *std::max_element(consensus.begin(), consensus.end())});
      }
      if (std::max({primal, -cone, change}) < opt.accuracy) {
        result.converged = true;
        result.primal_residual = primal;
        result.cone_residual = cone;
        break;
      }
      result.primal_residual = primal;
      result.cone_residual = cone;
    }
  }
  result.iterations = it;
  result.primal_value = objective_value(problem, x);

  result.rounded_operators = round_to_feasible(x, layout, threads);
  result.rounded_value = objective_value(problem, result.rounded_operators);

  // Dual candidate from the affine-step multiplier, then shifted by t * 1 so that
  // H - C_k = (-rho U_k) + (-rho W_k) + (E_k + t 1) lies in PSD + T_A(PSD).
  ComplexMatrix h = -2.0 * rho * id;
  for (std::size_t i = 0; i < n; ++i) h += cost[i] + rho * (y[i] - u[i] + z[i] - w[i]);
  h = hermitian_part(h / nd);
  std::vector<double> shifts(n);
  parallel_for(n, threads, [&](std::size_t k) {
    const ComplexMatrix psd_part = psd_project(hermitian_part(-rho * u[k]));
    const ComplexMatrix ppt_part = detail::ppt_project(hermitian_part(-rho * w[k]), layout);
    const ComplexMatrix rest = hermitian_part(h - cost[k] - psd_part - ppt_part);
    shifts[k] = std::max(0.0, -min_eigenvalue(rest));
  });
  const double shift = *std::max_element(shifts.begin(), shifts.end());
  result.dual_bound = h.trace().real() + shift * static_cast<double>(dim);

  result.operators = std::move(x);
  return result;
}

// Tr(H) of the analytic certificate, after checking it is dual feasible for `ens`.
inline double dual_bound_from_certificate(const DualCertificate& cert, const Ensemble& ens,
                                          double tol = kFeasibilityTol) {
  const auto report = verify_dual_feasibility(cert, ens, tol);
  if (!report.passed) {
    throw NumericalError("dual_bound_from_certificate: certificate failed the feasibility check "
                         "(worst eigenvalue " + std::to_string(report.worst_min_eigenvalue) + ")");
  }
  return cert.trace_value;
}

struct SandwichReport {
  std::size_t dim = 0;
  std::size_t n_states = 0;
  double fef = 0.0;
  double lower = 0.0;          // protocol value (incomplete-basis lower bound when N < d^2)
  double upper = 0.0;          // certificate trace, (d^2/N) F
  double upper_clipped = 0.0;  // min(1, upper)
  SDPResult sdp;
  FeasibilityReport feasibility;
  double tolerance = 0.0;      // accuracy + 1e-6
  bool ordered = false;        // lower <= sdp + tol and sdp <= upper + tol
  bool agree = false;          // N = d^2 only: all three within tol of each other
};

inline SandwichReport sandwich_report(const MaxEntBasis& basis, const ResourceSpectrum& spec,
                                      std::size_t n, const SolverOptions& options = {},
                                      CompletionStrategy strategy = CompletionStrategy::completion) {
  const std::size_t d = basis.dim();
  SandwichReport r;
  r.dim = d;
  r.n_states = n;
  r.fef = fef(spec);
  const Ensemble ens = build_ensemble(basis, spec, n);
  if (n == d * d) {
    r.lower = protocol_success(basis, spec).success;
  } else {
    r.lower = incomplete_bounds(basis, spec, n, strategy).lower;
  }
  const DualCertificate cert = build_certificate(basis, spec, n);
  r.feasibility = verify_dual_feasibility(cert, ens);
  r.upper = dual_bound_from_certificate(cert, ens);
  r.upper_clipped = std::min(1.0, r.upper);
  r.sdp = solve_primal_ppt(SDPProblem::from_ensemble(ens, options));
  r.tolerance = options.accuracy + 1e-6;
  const double v = r.sdp.primal_value;
  r.ordered = r.lower <= v + r.tolerance && v <= r.upper_clipped + r.tolerance;
  if (n == d * d) {
    r.agree = r.ordered && std::abs(v - r.lower) <= r.tolerance &&
              std::abs(r.upper - r.lower) <= r.tolerance;
  }
  return r;
}

}  // namespace entdist
