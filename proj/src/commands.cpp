#include "zeroone/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zeroone/law.hpp"
#include "zeroone/mc.hpp"

namespace zeroone::cli {

namespace {

report::Json header(const std::string& command, RunConfig cfg) {
  resolve_window(cfg);
  return report::Json{{"tool", "zeroone"},
                      {"version", report::kToolVersion},
                      {"command", command},
                      {"config", to_json(cfg)}};
}

expr::Expression require_f(const RunConfig& cfg) {
  if (!cfg.f || cfg.f->empty()) throw ConfigError("missing required key functional.f");
  return parse_field("functional.f", *cfg.f);
}

int check_exit(const feller::ValidationReport& v) { return v.all_pass() ? 0 : 1; }

int classify_exit(const law::BoundaryReport& r) {
  if (!r.validation.all_pass()) return 1;
  if (r.consistent == Tri::False) return 6;
  if (r.any_indeterminate()) return 3;
  return 0;
}

int verify_exit(mc::Agreement a, mc::Agreement b) {
  using mc::Agreement;
  if (a == Agreement::Contradicts || b == Agreement::Contradicts) return 4;
  if (a == Agreement::Underpowered || b == Agreement::Underpowered) return 5;
  return 0;
}

bool definite(law::Functional f) {
  return f == law::Functional::ConvergesAs || f == law::Functional::DivergesAs;
}

}  // namespace

Outcome run_check(const RunConfig& cfg) {
  const auto cs = coefficients(cfg);
  std::optional<expr::Expression> b;
  if (cfg.f && !cfg.f->empty()) b = expr::sqrt(require_f(cfg));
  const auto validation = feller::validate_conditions(cs, b, tolerances(cfg));
  Outcome o;
  o.exit_code = check_exit(validation);
  o.report = header("check", cfg);
  o.report["validation"] = report::to_json(validation);
  o.report["exit_code"] = o.exit_code;
  o.summary = report::summary(validation);
  return o;
}

Outcome run_classify(const RunConfig& cfg) {
  const auto cs = coefficients(cfg);
  const auto f = require_f(cfg);
  Outcome o;
  o.report = header("classify", cfg);
  try {
    const auto rep = law::full_report(cs, f, tolerances(cfg));
    o.exit_code = classify_exit(rep);
    o.report["boundary_report"] = report::to_json(rep);
    o.summary = report::summary(rep);
    if (!rep.validation.all_pass()) o.summary = report::summary(rep.validation) + o.summary;
  } catch (const law::PreconditionError& e) {
    o.exit_code = 1;
    o.report["precondition_error"] = {{"message", e.what()},
                                      {"location", e.location() ? report::number(*e.location()) : report::Json()}};
    o.summary = std::string("precondition failed: ") + e.what() + "\n";
  }
  o.report["exit_code"] = o.exit_code;
  return o;
}

Outcome run_verify(const RunConfig& input, unsigned workers) {
  RunConfig cfg = input;
  resolve_window(cfg);
  const auto cs = coefficients(cfg);
  const auto f = require_f(cfg);
  const auto b2 = cfg.b2 ? parse_field("verify.b2", *cfg.b2) : f;
  std::optional<expr::Expression> x_b2;
  if (cfg.x_b2) x_b2 = parse_field("verify.x_b2", *cfg.x_b2);
  const auto tol = tolerances(cfg);

  Outcome o;
  o.report = header("verify", cfg);

  law::BoundaryReport classification;
  try {
    classification = law::full_report(cs, f, tol);
  } catch (const law::PreconditionError& e) {
    o.exit_code = 1;
    o.report["precondition_error"] = {{"message", e.what()},
                                      {"location", e.location() ? report::number(*e.location()) : report::Json()}};
    o.report["exit_code"] = o.exit_code;
    o.summary = std::string("precondition failed: ") + e.what() + "\n";
    return o;
  }
  o.report["boundary_report"] = report::to_json(classification);
  o.summary = report::summary(classification);

  mc::SimConfig sim = cfg.sim;
  sim.workers = std::max(1u, workers);
  mc::VerificationSummary identity;
  try {
    identity = mc::verify_time_change_identity(cs, b2, sim, x_b2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("time-change experiment: ") + e.what());
  }

  // The zero-one experiment needs a definite verdict; R is preferred.
  mc::VerificationSummary zero_one;
  std::optional<feller::Endpoint> boundary;
  if (definite(classification.r.functional)) {
    boundary = feller::Endpoint::R;
  } else if (definite(classification.ell.functional)) {
    boundary = feller::Endpoint::Ell;
  }
  if (boundary) {
    mc::SimConfig zsim = sim;
    zsim.L = cfg.zero_one.L.value_or(sim.L);
    zsim.R = cfg.zero_one.R.value_or(sim.R);
    zsim.base_step = cfg.zero_one.base_step;
    zsim.n_paths = cfg.zero_one.n_paths;
    zsim.horizon = *std::max_element(cfg.zero_one.horizons.begin(), cfg.zero_one.horizons.end());
    mc::ZeroOneOptions zopts;
    zopts.stabilization_tol = cfg.zero_one.stabilization_tol;
    zopts.growth_factor = cfg.zero_one.growth_factor;
    const auto profile = feller::ScaleProfile::build(cs, tol);
    try {
      zero_one = mc::verify_zero_one_law(cs, profile, f, zsim, cfg.zero_one.horizons, *boundary,
                                         classification.at(*boundary).functional, zopts);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("zero-one experiment: ") + e.what());
    }
  } else {
    zero_one.verdict_agreement = mc::Agreement::Underpowered;
    zero_one.note = "no boundary has a CONVERGES_AS or DIVERGES_AS verdict; nothing to test";
  }

  o.exit_code = verify_exit(identity.verdict_agreement, zero_one.verdict_agreement);
  o.report["time_change_identity"] = report::to_json(identity);
  report::Json z = report::to_json(zero_one);
  z["boundary"] = boundary ? report::Json(feller::to_string(*boundary)) : report::Json(nullptr);
  o.report["zero_one_law"] = z;
  o.report["exit_code"] = o.exit_code;
  o.summary += report::summary(identity, "time-change identity") + report::summary(zero_one, "zero-one law");

  if (cfg.dump_paths > 0) {
    std::ostringstream dump;
    for (std::size_t i = 0; i < std::min(cfg.dump_paths, cfg.sim.n_paths); ++i) {
      auto rec = timechange::accumulate_phi(mc::simulate_path(cs, sim, i), b2);
      dump << report::to_json(rec).dump() << "\n";
    }
    o.path_dump = dump.str();
  }
  return o;
}

int execute(const std::string& command, const RunConfig& cfg, unsigned workers, std::ostream& out,
            std::ostream& err) {
  Outcome o;
  try {
    if (command == "check") {
      o = run_check(cfg);
    } else if (command == "classify") {
      o = run_classify(cfg);
    } else if (command == "verify") {
      o = run_verify(cfg, workers);
    } else {
      err << "unknown command " << command << "\n";
      return 2;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream file(dir / name, std::ios::binary);
    file << text;
    if (!file) err << "warning: could not write " << (dir / name).string() << "\n";
  };
  write(command + ".json", report::serialize(o.report));
  write(command + ".txt", o.summary);
  if (!o.path_dump.empty()) write(command + "_paths.jsonl", o.path_dump);
  out << o.summary << "exit " << o.exit_code << "\n";
  return o.exit_code;
}

}  // namespace zeroone::cli
