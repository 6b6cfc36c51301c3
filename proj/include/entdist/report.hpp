#pragma once

// JSON surfaces: the custom basis file format and the machine-readable reports
// emitted by the CLI.
//
// Basis file:
//   {"dim": d, "unitaries": [ [[re, im], ...], ... ]}
// one flat row-major list of d*d [re, im] pairs per unitary.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "entdist/certificate.hpp"
#include "entdist/measures.hpp"
#include "entdist/protocol.hpp"
#include "entdist/sdp.hpp"
#include "entdist/states.hpp"

namespace entdist {

using Json = nlohmann::json;

inline Json basis_to_json(const MaxEntBasis& basis) {
  Json unitaries = Json::array();
  for (const auto& u : basis.unitaries()) {
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      for (Eigen::Index c = 0; c < u.cols(); ++c) entries.push_back({u(r, c).real(), u(r, c).imag()});
    }
    unitaries.push_back(std::move(entries));
  }
  return {{"dim", basis.dim()}, {"unitaries", std::move(unitaries)}};
}

// Parses the matrices without checking basis properties; see basis_from_json.
inline std::vector<ComplexMatrix> unitaries_from_json(const Json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("dim") || !doc.contains("unitaries")) {
      throw InputError("basis file: expected an object with \"dim\" and \"unitaries\"");
    }
    const auto d = doc.at("dim").get<long long>();
    if (d < 2) throw InputError("basis file: dim must be >= 2");
    const auto& list = doc.at("unitaries");
    if (!list.is_array() || list.empty()) throw InputError("basis file: \"unitaries\" must be a non-empty array");
    std::vector<ComplexMatrix> out;
    for (const auto& entries : list) {
      if (!entries.is_array() || entries.size() != static_cast<std::size_t>(d * d)) {
        throw InputError("basis file: each unitary needs dim*dim = " + std::to_string(d * d) + " entries");
      }
      ComplexMatrix u(d, d);
      for (long long idx = 0; idx < d * d; ++idx) {
        const auto& z = entries.at(static_cast<std::size_t>(idx));
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
          throw InputError("basis file: entries must be [re, im] number pairs");
        }
        u(idx / d, idx % d) = {z[0].get<double>(), z[1].get<double>()};
      }
      out.push_back(std::move(u));
    }
    return out;
  } catch (const Json::exception& e) {
    throw InputError(std::string("basis file: ") + e.what());
  }
}

inline MaxEntBasis basis_from_json(const Json& doc) { return MaxEntBasis(unitaries_from_json(doc)); }

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what + ": malformed JSON (" + e.what() + ")");
  }
}

inline MaxEntBasis load_basis_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open basis file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return basis_from_json(parse_json_text(buf.str(), path));
}

inline Json to_json(const BasisValidation& v) {
  return {{"dim", v.dim},
          {"count", v.count},
          {"complete", v.complete},
          {"unitarity_defect", v.unitarity_defect},
          {"orthogonality_defect", v.orthogonality_defect},
          {"identity_defect", v.identity_defect},
          {"accepted", v.accepted}};
}

inline Json to_json(const ResourceSpectrum& spec) {
  std::vector<double> weights;
  for (double a : spec.coeffs()) weights.push_back(a * a);
  return {{"dim", spec.dim()}, {"schmidt_coefficients", spec.coeffs()}, {"weights", weights}};
}

inline Json fef_report(const ResourceSpectrum& spec) {
  const double f = fef(spec);
  const double neg = negativity(spec);
  const double rel = (1.0 + 2.0 * neg) / static_cast<double>(spec.dim());
  return {{"spectrum", to_json(spec)},
          {"fef", f},
          {"negativity", neg},
          {"relation_value", rel},
          {"relation_residual", std::abs(rel - f)}};
}

inline Json to_json(const FeasibilityReport& r) {
  return {{"min_eigenvalues", r.min_eigenvalues},
          {"decomposition_residuals", r.decomposition_residuals},
          {"worst_min_eigenvalue", r.worst_min_eigenvalue},
          {"max_decomposition_residual", r.max_decomposition_residual},
          {"trace_value", r.trace_value},
          {"tol", r.tol},
          {"threshold", r.threshold},
          {"passed", r.passed}};
}

inline Json to_json(const UpsilonReport& r) {
  return {{"dim", r.dim},
          {"zero_multiplicity", r.zero_multiplicity},
          {"two_multiplicity", r.two_multiplicity},
          {"upsilon_spectrum_error", r.upsilon_spectrum_error},
          {"complement_spectrum_error", r.complement_spectrum_error},
          {"upsilon_min_eigenvalues", r.upsilon_min_eigenvalues},
          {"complement_min_eigenvalues", r.complement_min_eigenvalues},
          {"max_error", r.max_error},
          {"passed", r.passed}};
}

inline Json to_json(const CertificateIdentities& c) {
  return {{"transposed_resource_residual", c.transposed_resource_residual},
          {"identity_resolution_residual", c.identity_resolution_residual},
          {"gamma_min_eigenvalue", c.gamma_min_eigenvalue}};
}

inline Json to_json(const ProtocolReport& r) {
  return {{"per_term", r.per_term},
          {"success", r.success},
          {"fef", r.fef},
          {"max_term_deviation", r.max_term_deviation}};
}

inline Json to_json(const SampledProtocol& s) {
  return {{"shots", s.shots}, {"successes", s.successes}, {"frequency", s.frequency}};
}

inline Json to_json(const IncompleteBounds& b) {
  return {{"n_states", b.n_states},
          {"strategy", to_string(b.strategy)},
          {"fef", b.fef},
          {"first_term", b.first_term},
          {"best_overlaps", b.best_overlaps},
          {"chosen", b.chosen},
          {"lower", b.lower},
          {"upper", b.upper},
          {"in_bounded_regime", b.in_bounded_regime}};
}

inline Json to_json(const SolverOptions& o) {
  return {{"accuracy", o.accuracy},
          {"max_iterations", o.max_iterations},
          {"step", o.step},
          {"relaxation", o.relaxation},
          {"check_interval", o.check_interval},
          {"trace_interval", o.trace_interval}};
}

inline Json to_json(const SDPResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"objective", t.objective},
                     {"primal_residual", t.primal_residual},
                     {"cone_residual", t.cone_residual},
                     {"consensus_residual", t.consensus_residual}});
  }
  return {{"primal_value", r.primal_value},
          {"rounded_value", r.rounded_value},
          {"dual_bound", r.dual_bound},
          {"primal_residual", r.primal_residual},
          {"cone_residual", r.cone_residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"trace", std::move(trace)}};
}

inline Json to_json(const SandwichReport& r) {
  return {{"dim", r.dim},
          {"n_states", r.n_states},
          {"fef", r.fef},
          {"lower", r.lower},
          {"sdp", r.sdp.primal_value},
          {"upper", r.upper},
          {"upper_clipped", r.upper_clipped},
          {"tolerance", r.tolerance},
          {"ordered", r.ordered},
          {"agree", r.agree},
          {"feasibility_passed", r.feasibility.passed},
          {"solver", to_json(r.sdp)}};
}

}  // namespace entdist
