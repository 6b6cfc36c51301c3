// entdist: command-line front end for the discrimination toolkit.
//
// Exit codes: 0 success, 1 numerical or suite failure, 2 input/validation error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "entdist/entdist.hpp"

using namespace entdist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;

struct RunConfig {
  std::size_t dim = 2;
  bool dim_given = false;
  std::string spectrum = "uniform";
  bool amplitudes = false;
  bool normalize = false;
  std::size_t n_states = 0;  // 0: d^2
  std::string basis_file;
  bool random_basis = false;
  double tol = kFeasibilityTol;
  double accuracy = 1e-4;
  std::size_t max_iters = 50000;
  double step = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  bool csv = false;
  std::size_t sweep = 0;
  std::string strategy = "completion";
  std::uint64_t shots = 0;
};

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("--spectrum: cannot parse '" + item + "' as a number");
    }
    if (used != item.size()) throw InputError("--spectrum: cannot parse '" + item + "' as a number");
    values.push_back(v);
  }
  if (values.empty()) throw InputError("--spectrum: empty list");
  return values;
}

ResourceSpectrum resolve_spectrum(const RunConfig& cfg, std::size_t d, Rng& rng) {
  if (cfg.spectrum == "uniform") return ResourceSpectrum::uniform(d);
  if (cfg.spectrum == "product") return ResourceSpectrum::product(d);
  if (cfg.spectrum == "random") return random_spectrum(d, rng);
  const auto values = parse_number_list(cfg.spectrum);
  if (values.size() != d) {
    throw InputError("--spectrum: got " + std::to_string(values.size()) + " values for dimension " +
                     std::to_string(d));
  }
  return cfg.amplitudes ? ResourceSpectrum::from_amplitudes(values, cfg.normalize)
                        : ResourceSpectrum::from_weights(values, cfg.normalize);
}

// Dimension: --dim, else the length of an explicit spectrum list, else 2.
std::size_t resolve_dim(const RunConfig& cfg) {
  std::size_t d = cfg.dim;
  if (!cfg.dim_given && cfg.spectrum != "uniform" && cfg.spectrum != "product" && cfg.spectrum != "random") {
    d = parse_number_list(cfg.spectrum).size();
  }
  if (d < 2) throw InputError("--dim must be >= 2");
  return d;
}

MaxEntBasis resolve_basis(const RunConfig& cfg, std::size_t d, Rng& rng) {
  if (!cfg.basis_file.empty()) {
    auto basis = load_basis_file(cfg.basis_file);
    if (basis.dim() != d) {
      throw InputError("basis file has dimension " + std::to_string(basis.dim()) + ", expected " +
                       std::to_string(d));
    }
    return basis;
  }
  return cfg.random_basis ? random_basis(d, rng) : weyl_basis(d);
}

std::size_t resolve_n(const RunConfig& cfg, std::size_t d) {
  const std::size_t n = cfg.n_states ? cfg.n_states : d * d;
  if (n > d * d) throw InputError("--n-states must lie in [1, d^2]");
  return n;
}

CompletionStrategy resolve_strategy(const RunConfig& cfg) {
  return cfg.strategy == "projector" ? CompletionStrategy::projector : CompletionStrategy::completion;
}

SolverOptions resolve_solver(const RunConfig& cfg) {
  SolverOptions o;
  o.accuracy = cfg.accuracy;
  o.max_iterations = cfg.max_iters;
  o.step = cfg.step;
  return o;
}

// Spectra for --sweep K: at d = 2 a deterministic grid a_1^2 in [1/2, 1];
// otherwise K seeded random spectra.
std::vector<ResourceSpectrum> sweep_spectra(std::size_t d, std::size_t k, Rng& rng) {
  std::vector<ResourceSpectrum> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (d == 2) {
      const double t = k > 1 ? static_cast<double>(i) / static_cast<double>(k - 1) : 0.0;
      const double w1 = 0.5 + 0.5 * t;
      out.push_back(ResourceSpectrum::from_weights(std::vector<double>{w1, 1.0 - w1}, true));
    } else {
      out.push_back(random_spectrum(d, rng));
    }
  }
  return out;
}

Json config_json(const RunConfig& cfg, std::size_t d) {
  return {{"dim", d},
          {"spectrum", cfg.spectrum},
          {"amplitudes", cfg.amplitudes},
          {"normalize", cfg.normalize},
          {"basis", cfg.basis_file.empty() ? (cfg.random_basis ? "random" : "weyl") : cfg.basis_file},
          {"seed", cfg.seed}};
}

// Flattens nested objects into dotted keys; arrays are skipped.
void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else if (!it->is_array()) {
      out.emplace_back(key, *it);
    }
  }
}

// Strings with separators or quotes are quoted with doubled inner quotes.
std::string csv_cell(const Json& v) {
  if (!v.is_string()) return v.dump();
  const auto s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

// One header row, then one row per record.
std::string to_csv(const std::vector<Json>& records) {
  std::ostringstream os;
  std::vector<std::string> header;
  std::vector<std::map<std::string, Json>> rows;
  for (const auto& r : records) {
    std::vector<std::pair<std::string, Json>> flat;
    flatten(r, "", flat);
    std::map<std::string, Json> row;
    for (auto& [k, v] : flat) {
      if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
      row[k] = v;
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) os << ",";
      const auto it = row.find(header[i]);
      if (it != row.end()) os << csv_cell(it->second);
    }
    os << "\n";
  }
  return os.str();
}

void emit(const RunConfig& cfg, const Json& doc, const std::vector<Json>& csv_records) {
  const std::string text = cfg.csv ? to_csv(csv_records) : doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InputError("cannot open output file " + cfg.out);
  f << text;
}

void emit(const RunConfig& cfg, const Json& doc) { emit(cfg, doc, {doc}); }

int cmd_fef(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  if (cfg.sweep) {
    Json rows = Json::array();
    std::vector<Json> records;
    for (const auto& spec : sweep_spectra(d, cfg.sweep, rng)) {
      const Json r = fef_report(spec);
      Json rec = {{"fef", r["fef"]}, {"negativity", r["negativity"]}, {"relation_residual", r["relation_residual"]}};
      for (std::size_t i = 0; i < d; ++i) rec["weight_" + std::to_string(i + 1)] = spec[i] * spec[i];
      records.push_back(rec);
      rows.push_back(r);
    }
    emit(cfg, {{"config", config_json(cfg, d)}, {"sweep", rows}}, records);
    return kExitOk;
  }
  const Json r = fef_report(resolve_spectrum(cfg, d, rng));
  emit(cfg, r);
  return kExitOk;
}

int cmd_basis(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  std::vector<ComplexMatrix> unitaries;
  std::string source;
  if (!cfg.basis_file.empty()) {
    std::ifstream in(cfg.basis_file);
    if (!in) throw InputError("cannot open basis file " + cfg.basis_file);
    std::stringstream buf;
    buf << in.rdbuf();
    unitaries = unitaries_from_json(parse_json_text(buf.str(), cfg.basis_file));
    source = cfg.basis_file;
  } else {
    unitaries = (cfg.random_basis ? random_basis(d, rng) : weyl_basis(d)).unitaries();
    source = cfg.random_basis ? "random" : "weyl";
  }
  const auto v = validate_basis(unitaries);
  Json doc = {{"source", source}, {"validation", to_json(v)}};
  const bool ok = v.accepted && v.complete && v.identity_defect <= kBasisTol;
  doc["valid"] = ok;
  if (ok) {
    const MaxEntBasis basis(unitaries);
    doc["upsilon"] = to_json(upsilon_spectrum_check(basis));
    doc["basis"] = basis_to_json(basis);
  }
  Json flat = doc;
  flat.erase("basis");
  emit(cfg, doc, {flat});
  if (!ok) {
    std::cerr << "error: basis failed validation\n";
    return kExitInput;
  }
  return kExitOk;
}

Json protocol_json(const MaxEntBasis& basis, const ResourceSpectrum& spec) {
  const auto residuals = teleport_residuals(basis, spec, basis.size());
  Json j = to_json(protocol_success(basis, spec));
  j["gram_cross_check_residual"] = residuals.cross_check_residual;
  return j;
}

int cmd_protocol(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto basis = resolve_basis(cfg, d, rng);
  if (cfg.sweep) {
    Json rows = Json::array();
    std::vector<Json> records;
    for (const auto& spec : sweep_spectra(d, cfg.sweep, rng)) {
      const Json p = protocol_json(basis, spec);
      Json rec = {{"negativity", negativity(spec)}, {"fef", p["fef"]}, {"success", p["success"]},
                  {"max_term_deviation", p["max_term_deviation"]}};
      for (std::size_t i = 0; i < d; ++i) rec["weight_" + std::to_string(i + 1)] = spec[i] * spec[i];
      records.push_back(rec);
      rows.push_back({{"spectrum", to_json(spec)}, {"protocol", p}});
    }
    emit(cfg, {{"config", config_json(cfg, d)}, {"sweep", rows}}, records);
    return kExitOk;
  }
  const auto spec = resolve_spectrum(cfg, d, rng);
  Json doc = {{"config", config_json(cfg, d)}, {"spectrum", to_json(spec)}, {"protocol", protocol_json(basis, spec)}};
  if (cfg.shots) doc["sampled"] = to_json(sample_protocol(basis, spec, cfg.shots, cfg.seed));
  emit(cfg, doc);
  return kExitOk;
}

int cmd_certificate(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto spec = resolve_spectrum(cfg, d, rng);
  const auto basis = resolve_basis(cfg, d, rng);
  const std::size_t n = resolve_n(cfg, d);
  const auto cert = build_certificate(basis, spec, n);
  const auto feas = verify_dual_feasibility(cert, build_ensemble(basis, spec, n), cfg.tol);
  Json doc = {{"config", config_json(cfg, d)},
              {"n_states", n},
              {"fef", cert.fef},
              {"scale", cert.scale},
              {"trace_value", cert.trace_value},
              {"upper_clipped", std::min(1.0, cert.trace_value)},
              {"feasibility", to_json(feas)},
              {"upsilon", to_json(upsilon_spectrum_check(basis))},
              {"identities", to_json(check_certificate_identities(cert.parts, spec))}};
  emit(cfg, doc);
  return feas.passed ? kExitOk : kExitNumerical;
}

int cmd_sdp(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto spec = resolve_spectrum(cfg, d, rng);
  const auto basis = resolve_basis(cfg, d, rng);
  const std::size_t n = resolve_n(cfg, d);
  const auto options = resolve_solver(cfg);
  const auto result = solve_primal_ppt(SDPProblem::from_ensemble(build_ensemble(basis, spec, n), options));
  Json doc = {{"config", config_json(cfg, d)},
              {"n_states", n},
              {"fef", fef(spec)},
              {"options", to_json(options)},
              {"result", to_json(result)}};
  emit(cfg, doc);
  return kExitOk;
}

Json bounds_json(const MaxEntBasis& basis, const ResourceSpectrum& spec, std::size_t n,
                 CompletionStrategy strategy) {
  const auto chosen = incomplete_bounds(basis, spec, n, strategy);
  const auto completion = incomplete_bounds(basis, spec, n, CompletionStrategy::completion);
  const auto projector = incomplete_bounds(basis, spec, n, CompletionStrategy::projector);
  Json j = to_json(chosen);
  j["strategy_lower"] = {{"completion", completion.lower}, {"projector", projector.lower}};
  j["better_strategy"] = projector.lower > completion.lower + detail::kTieTol ? "projector" : "completion";
  if (!chosen.in_bounded_regime) j["warning"] = "N < d + 1: outside the regime covered by the bounds";
  return j;
}

int cmd_bounds(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto basis = resolve_basis(cfg, d, rng);
  const std::size_t n = resolve_n(cfg, d);
  const auto strategy = resolve_strategy(cfg);
  if (cfg.sweep) {
    Json rows = Json::array();
    std::vector<Json> records;
    for (const auto& spec : sweep_spectra(d, cfg.sweep, rng)) {
      const Json b = bounds_json(basis, spec, n, strategy);
      Json rec = {{"negativity", negativity(spec)}, {"fef", b["fef"]}, {"lower", b["lower"]}, {"upper", b["upper"]}};
      for (std::size_t i = 0; i < d; ++i) rec["weight_" + std::to_string(i + 1)] = spec[i] * spec[i];
      records.push_back(rec);
      rows.push_back({{"spectrum", to_json(spec)}, {"bounds", b}});
    }
    emit(cfg, {{"config", config_json(cfg, d)}, {"n_states", n}, {"sweep", rows}}, records);
    return kExitOk;
  }
  const auto spec = resolve_spectrum(cfg, d, rng);
  emit(cfg, {{"config", config_json(cfg, d)}, {"spectrum", to_json(spec)}, {"bounds", bounds_json(basis, spec, n, strategy)}});
  return kExitOk;
}

int cmd_sandwich(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto spec = resolve_spectrum(cfg, d, rng);
  const auto basis = resolve_basis(cfg, d, rng);
  const std::size_t n = resolve_n(cfg, d);
  const auto r = sandwich_report(basis, spec, n, resolve_solver(cfg), resolve_strategy(cfg));
  Json doc = to_json(r);
  doc["config"] = config_json(cfg, d);
  emit(cfg, doc);
  const bool ok = r.ordered && (n < d * d || r.agree);
  return ok ? kExitOk : kExitNumerical;
}

// Runs every invariant suite except the SDP at the configured dimension.
int cmd_verify(const RunConfig& cfg) {
  const std::size_t d = resolve_dim(cfg);
  Rng rng(cfg.seed);
  const auto spec = resolve_spectrum(cfg, d, rng);
  const auto basis = resolve_basis(cfg, d, rng);
  Json checks = Json::array();
  bool all = true;
  const auto record = [&](const std::string& name, bool passed, Json detail) {
    all = all && passed;
    checks.push_back({{"name", name}, {"passed", passed}, {"detail", std::move(detail)}});
  };

  const auto validation = validate_basis(basis.unitaries());
  record("basis_validation", validation.accepted && validation.complete, to_json(validation));

  const auto ups = upsilon_spectrum_check(basis);
  record("upsilon_spectrum", ups.passed, {{"max_error", ups.max_error}});

  const auto cert = build_certificate(basis, spec);
  const auto ids = check_certificate_identities(cert.parts, spec);
  record("certificate_identities",
         ids.transposed_resource_residual < 1e-12 && ids.identity_resolution_residual < 1e-12 &&
             ids.gamma_min_eigenvalue >= -1e-12,
         to_json(ids));
  record("certificate_trace", std::abs(cert.trace_value - fef(spec)) < 1e-12,
         {{"trace_value", cert.trace_value}, {"fef", fef(spec)}});

  const auto feas = verify_dual_feasibility(cert, build_ensemble(basis, spec, d * d), cfg.tol);
  record("dual_feasibility", feas.passed && feas.max_decomposition_residual < 1e-12,
         {{"worst_min_eigenvalue", feas.worst_min_eigenvalue},
          {"threshold", feas.threshold},
          {"max_decomposition_residual", feas.max_decomposition_residual}});

  double swap_worst = check_swap_transpose_identity(density(max_ent_state(identity(d))), density(resource_state(spec)));
  for (int i = 0; i < 20; ++i) {
    const auto l = random_complex_matrix(d * d, d * d, rng);
    const auto x = random_complex_matrix(d * d, d * d, rng);
    swap_worst = std::max(swap_worst, check_swap_transpose_identity(l, x));
  }
  record("swap_transpose_identity", swap_worst < 1e-12, {{"max_residual", swap_worst}});

  const auto proto = protocol_success(basis, spec);
  record("protocol_per_term", proto.max_term_deviation < 1e-10,
         {{"success", proto.success}, {"fef", proto.fef}, {"max_term_deviation", proto.max_term_deviation}});

  const auto res = teleport_residuals(basis, spec, d * d);
  record("gram_cross_check", res.cross_check_residual < kGramTol, {{"residual", res.cross_check_residual}});

  Json per_n = Json::array();
  bool bounds_ok = true;
  for (std::size_t n = d + 1; n <= d * d; ++n) {
    const auto b = incomplete_bounds(basis, spec, n);
    const auto c = build_certificate(basis, spec, n);
    const auto f = verify_dual_feasibility(c, build_ensemble(basis, spec, n), cfg.tol);
    const bool ok = b.lower >= b.fef - 1e-12 && b.lower <= b.upper + kProtocolTol && b.upper <= 1.0 &&
                    f.passed && std::abs(c.trace_value - static_cast<double>(d * d) / n * b.fef) < 1e-12;
    bounds_ok = bounds_ok && ok;
    per_n.push_back({{"n_states", n}, {"lower", b.lower}, {"upper", b.upper}, {"scaled_certificate_feasible", f.passed}});
  }
  record("incomplete_bounds", bounds_ok, per_n);

  Json doc = {{"config", config_json(cfg, d)}, {"spectrum", to_json(spec)}, {"checks", checks}, {"passed", all}};
  std::vector<Json> records;
  for (const auto& c : checks) records.push_back({{"name", c["name"]}, {"passed", c["passed"]}});
  emit(cfg, doc, records);
  return all ? kExitOk : kExitNumerical;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool solver, bool strategy) {
  sub->add_option("--dim", cfg.dim, "Local dimension d")->check(CLI::Range(2, 64));
  sub->add_option("--spectrum", cfg.spectrum,
                  "Resource spectrum: comma-separated squared Schmidt weights, or uniform | product | random")
      ->capture_default_str();
  sub->add_flag("--amplitudes", cfg.amplitudes, "Read --spectrum as Schmidt amplitudes instead of squared weights");
  sub->add_flag("--normalize", cfg.normalize, "Normalize and sort the spectrum instead of rejecting it");
  sub->add_option("--n-states", cfg.n_states, "Number of basis states N (default d^2)")->check(CLI::PositiveNumber);
  sub->add_option("--basis-file", cfg.basis_file, "JSON basis file (default: Weyl basis)");
  sub->add_flag("--random-basis", cfg.random_basis, "Use the Weyl basis conjugated by a seeded random unitary");
  sub->add_option("--tol", cfg.tol, "Dual feasibility tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Seed for random spectra, bases and sampling")->capture_default_str();
  sub->add_option("--out", cfg.out, "Write the report to this file instead of stdout");
  sub->add_flag("--csv", cfg.csv, "Emit a flat CSV table instead of JSON");
  sub->add_option("--sweep", cfg.sweep, "Sweep K spectra (d = 2: grid in a_1^2; otherwise seeded random)");
  if (solver) {
    sub->add_option("--accuracy", cfg.accuracy, "SDP stopping accuracy")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-iters", cfg.max_iters, "SDP iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--step", cfg.step, "ADMM penalty (0 selects 1/N)")->check(CLI::NonNegativeNumber);
  }
  if (strategy) {
    sub->add_option("--strategy", cfg.strategy, "Completion strategy for N < d^2")
        ->check(CLI::IsMember({"completion", "projector"}))
        ->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal discrimination of maximally entangled bases with an entangled resource"};
  app.require_subcommand(1);
  RunConfig cfg;

  struct Command {
    const char* name;
    const char* help;
    bool solver;
    bool strategy;
    std::function<int(const RunConfig&)> run;
  };
  const std::vector<Command> commands = {
      {"fef", "Fully entangled fraction and negativity of the resource", false, false, cmd_fef},
      {"basis", "Validate a maximally entangled basis", false, false, cmd_basis},
      {"protocol", "Simulate the teleportation protocol", false, false, cmd_protocol},
      {"certificate", "Build and verify the analytic dual certificate", false, false, cmd_certificate},
      {"sdp", "Solve the primal PPT discrimination SDP", true, false, cmd_sdp},
      {"bounds", "Lower and upper bounds for incomplete bases", false, true, cmd_bounds},
      {"sandwich", "Protocol value, SDP value and certificate bound side by side", true, true, cmd_sandwich},
      {"verify", "Run every invariant suite except the SDP", false, false, cmd_verify},
  };
  std::map<CLI::App*, const Command*> by_app;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, cfg, c.solver, c.strategy);
    by_app[sub] = &c;
  }
  CLI::App* shots = app.get_subcommand("protocol");
  shots->add_option("--shots", cfg.shots, "Also sample the protocol with this many shots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    for (const auto& [sub, cmd] : by_app) {
      if (!sub->parsed()) continue;
      cfg.dim_given = sub->count("--dim") > 0;
      return cmd->run(cfg);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
