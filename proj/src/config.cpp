#include "zeroone/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "zeroone/report.hpp"

namespace zeroone::cli {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& key, std::string text) {
  boost::algorithm::trim(text);
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + text + "'");
  }
  if (used != text.size() || std::isnan(v)) throw ConfigError("bad number for " + key + ": '" + text + "'");
  return v;
}

std::optional<std::string> get_text(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(key)) {
    std::string s = boost::algorithm::trim_copy(*v);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
  }
  return std::nullopt;
}

std::optional<double> get_number(const pt::ptree& tree, const std::string& key) {
  if (auto s = get_text(tree, key)) return to_double(key, *s);
  return std::nullopt;
}

std::size_t get_count(const pt::ptree& tree, const std::string& key, std::size_t fallback) {
  const auto v = get_number(tree, key);
  if (!v) return fallback;
  if (*v < 0 || *v != std::floor(*v) || *v > 1e15) throw ConfigError(key + " must be a non-negative integer");
  return static_cast<std::size_t>(*v);
}

std::string require_text(const pt::ptree& tree, const std::string& key) {
  auto v = get_text(tree, key);
  if (!v || v->empty()) throw ConfigError("missing required key " + key);
  return *v;
}

}  // namespace

RunConfig parse_config(const std::string& ini_text) {
  // Comments may follow a value; expressions never contain ';' or '#'.
  std::istringstream raw(ini_text);
  std::ostringstream stripped;
  for (std::string line; std::getline(raw, line);) stripped << line.substr(0, line.find_first_of(";#")) << "\n";
  pt::ptree tree;
  try {
    std::istringstream in(stripped.str());
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  cfg.mu = require_text(tree, "diffusion.mu");
  cfg.sigma = require_text(tree, "diffusion.sigma");
  cfg.ell = to_double("diffusion.ell", require_text(tree, "diffusion.ell"));
  cfg.r = to_double("diffusion.r", require_text(tree, "diffusion.r"));
  cfg.x0 = to_double("diffusion.x0", require_text(tree, "diffusion.x0"));
  cfg.c = get_number(tree, "diffusion.c");
  cfg.f = get_text(tree, "functional.f");
  cfg.b2 = get_text(tree, "verify.b2");
  cfg.x_b2 = get_text(tree, "verify.x_b2");

  auto& s = cfg.sim;
  s.horizon = get_number(tree, "sim.horizon").value_or(s.horizon);
  s.base_step = get_number(tree, "sim.base_step").value_or(s.base_step);
  s.step_shrink = get_number(tree, "sim.step_shrink").value_or(s.step_shrink);
  s.boundary_band = get_number(tree, "sim.boundary_band").value_or(s.boundary_band);
  const auto L = get_number(tree, "sim.L"), R = get_number(tree, "sim.R");
  if (L.has_value() != R.has_value()) throw ConfigError("sim.L and sim.R must be given together");
  if (L) {
    s.L = *L;
    s.R = *R;
    cfg.window_given = true;
  }
  s.n_paths = get_count(tree, "sim.n_paths", s.n_paths);
  s.seed = get_count(tree, "sim.seed", s.seed);

  auto& z = cfg.zero_one;
  if (auto h = get_text(tree, "zero_one.horizons")) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *h, boost::is_any_of(","));
    z.horizons.clear();
    for (const auto& p : parts) z.horizons.push_back(to_double("zero_one.horizons", p));
  }
  z.L = get_number(tree, "zero_one.L");
  z.R = get_number(tree, "zero_one.R");
  z.base_step = get_number(tree, "zero_one.base_step").value_or(z.base_step);
  z.n_paths = get_count(tree, "zero_one.n_paths", z.n_paths);
  z.stabilization_tol = get_number(tree, "zero_one.stabilization_tol").value_or(z.stabilization_tol);
  z.growth_factor = get_number(tree, "zero_one.growth_factor").value_or(z.growth_factor);

  cfg.tol = get_number(tree, "quad.tol").value_or(cfg.tol);
  cfg.margin = get_number(tree, "quad.margin").value_or(cfg.margin);
  cfg.ladder_length = static_cast<int>(get_count(tree, "quad.ladder_length", cfg.ladder_length));
  if (auto d = get_text(tree, "output.dir")) cfg.out_dir = *d;
  cfg.dump_paths = get_count(tree, "output.dump_paths", cfg.dump_paths);

  if (!(cfg.ell < cfg.r)) throw ConfigError("need ell < r");
  if (!(cfg.ell < cfg.x0 && cfg.x0 < cfg.r)) throw ConfigError("x0 must lie inside (ell, r)");
  if (!(cfg.tol > 0.0)) throw ConfigError("quad.tol must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void resolve_window(RunConfig& cfg) {
  if (cfg.window_given) return;
  const double reach = 10.0 * std::max(1.0, std::fabs(cfg.x0));
  cfg.sim.L = std::isfinite(cfg.ell) ? cfg.ell + 1e-3 * (cfg.x0 - cfg.ell) : cfg.x0 - reach;
  cfg.sim.R = std::isfinite(cfg.r) ? cfg.r - 1e-3 * (cfg.r - cfg.x0) : cfg.x0 + reach;
  cfg.window_given = true;
}

expr::Expression parse_field(const std::string& name, const std::string& text) {
  try {
    return expr::parse(text);
  } catch (const expr::ParseError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

feller::CoefficientSet coefficients(const RunConfig& cfg) {
  try {
    return feller::CoefficientSet::make(parse_field("diffusion.mu", cfg.mu), parse_field("diffusion.sigma", cfg.sigma),
                                        cfg.ell, cfg.r, cfg.x0, cfg.c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

feller::Tolerances tolerances(const RunConfig& cfg) {
  feller::Tolerances t;
  t.tol = cfg.tol;
  t.classify.tol = cfg.tol;
  t.classify.margin = cfg.margin;
  t.classify.ladder_length = cfg.ladder_length;
  return t;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  using report::number;
  nlohmann::ordered_json j;
  j["diffusion"] = {{"mu", cfg.mu},
                    {"sigma", cfg.sigma},
                    {"ell", number(cfg.ell)},
                    {"r", number(cfg.r)},
                    {"c", number(cfg.c ? *cfg.c : feller::default_reference_point(cfg.ell, cfg.r, cfg.x0))},
                    {"x0", number(cfg.x0)}};
  j["functional"] = {{"f", cfg.f ? nlohmann::ordered_json(*cfg.f) : nlohmann::ordered_json(nullptr)}};
  const std::string b2 = cfg.b2 ? *cfg.b2 : cfg.f.value_or("");
  j["verify"] = {{"b2", b2}, {"x_b2", cfg.x_b2 ? *cfg.x_b2 : b2}};
  const auto& s = cfg.sim;
  j["sim"] = {{"horizon", number(s.horizon)},       {"base_step", number(s.base_step)},
              {"step_shrink", number(s.step_shrink)}, {"boundary_band", number(s.boundary_band)},
              {"L", number(s.L)},                   {"R", number(s.R)},
              {"n_paths", s.n_paths},               {"seed", s.seed}};
  const auto& z = cfg.zero_one;
  nlohmann::ordered_json hs = nlohmann::ordered_json::array();
  for (double h : z.horizons) hs.push_back(number(h));
  j["zero_one"] = {{"horizons", hs},
                   {"L", number(z.L.value_or(s.L))},
                   {"R", number(z.R.value_or(s.R))},
                   {"base_step", number(z.base_step)},
                   {"n_paths", z.n_paths},
                   {"stabilization_tol", number(z.stabilization_tol)},
                   {"growth_factor", number(z.growth_factor)}};
  j["quad"] = {{"tol", number(cfg.tol)}, {"margin", number(cfg.margin)}, {"ladder_length", cfg.ladder_length}};
  j["output"] = {{"dump_paths", cfg.dump_paths}};
  return j;
}

}  // namespace zeroone::cli
