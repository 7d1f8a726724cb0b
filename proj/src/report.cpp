#include "zeroone/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace zeroone::report {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json interval(const stats::Interval& i) { return Json::array({number(i.lo), number(i.hi)}); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string verdict_text(const quad::IntegrabilityVerdict& v) {
  std::string s = quad::to_string(v.status);
  if (v.value) s += " (" + fmt(*v.value) + ")";
  return s;
}

}  // namespace

Json to_json(const quad::IntegrabilityVerdict& v) {
  Json evidence = Json::array();
  for (const auto& [level, partial] : v.evidence) evidence.push_back(Json::array({level, number(partial)}));
  return Json{{"status", quad::to_string(v.status)},
              {"value", optional_number(v.value)},
              {"error_estimate", optional_number(v.error_estimate)},
              {"divergence_exponent", optional_number(v.divergence_exponent)},
              {"evidence", evidence}};
}

Json to_json(const feller::ValidationReport& v) {
  Json entries = Json::array();
  for (const auto& e : v.entries) {
    entries.push_back(Json{{"name", e.name},
                           {"status", feller::to_string(e.status)},
                           {"detail", e.detail},
                           {"location", optional_number(e.location)}});
  }
  return Json{{"all_pass", v.all_pass()}, {"entries", entries}};
}

Json to_json(const feller::ExplosionReport& e) {
  return Json{{"status", feller::to_string(e.status)},
              {"ell_attainable", to_string(e.ell_attainable)},
              {"r_attainable", to_string(e.r_attainable)}};
}

Json to_json(const law::EventStructure& e) {
  return Json{{"s_ell_finite", to_string(e.s_ell_finite)},
              {"s_r_finite", to_string(e.s_r_finite)},
              {"a_certain", to_string(e.a_certain)},
              {"ell_events", law::to_string(e.ell_events)},
              {"r_events", law::to_string(e.r_events)}};
}

Json to_json(const law::ZeroOneVerdict& v) {
  return Json{{"boundary", feller::to_string(v.boundary)},
              {"event_probability", law::to_string(v.event_probability)},
              {"functional", law::to_string(v.functional)},
              {"criterion", v.criterion ? to_json(*v.criterion) : Json(nullptr)}};
}

Json to_json(const law::BoundaryReport& r) {
  return Json{{"validation", to_json(r.validation)},
              {"scale", {{"ell", to_json(r.s_ell)}, {"r", to_json(r.s_r)}}},
              {"test_function_y", {{"ell", to_json(r.v_ell)}, {"r", to_json(r.v_r)}}},
              {"test_function_x", {{"ell", to_json(r.vx_ell)}, {"r", to_json(r.vx_r)}}},
              {"explosion_y", to_json(r.explosion_y)},
              {"explosion_x", to_json(r.explosion_x)},
              {"certain_explosion_x", feller::to_string(r.certain_explosion_x)},
              {"events", to_json(r.events)},
              {"zero_one", {{"ell", to_json(r.ell)}, {"r", to_json(r.r)}}},
              {"predicted_certain_finite", to_string(r.predicted_certain_finite)},
              {"consistent", to_string(r.consistent)},
              {"consistency_note", r.consistency_note}};
}

Json to_json(const mc::EventFrequencies& f) {
  return Json{{"n", f.n},
              {"left", f.left},
              {"right", f.right},
              {"censored", f.censored},
              {"failed", f.failed},
              {"left_ci", interval(f.left_ci)},
              {"right_ci", interval(f.right_ci)},
              {"censored_ci", interval(f.censored_ci)},
              {"clamp_count", f.clamp_count}};
}

Json to_json(const mc::VerificationSummary& s) {
  Json sides = Json::array();
  for (const auto& c : s.sides) {
    sides.push_back(Json{{"side", timechange::to_string(c.side)},
                         {"n1", c.n1},
                         {"n2", c.n2},
                         {"ks", number(c.ks)},
                         {"threshold", number(c.threshold)},
                         {"evaluated", c.evaluated}});
  }
  Json rungs = Json::array();
  for (const auto& r : s.functional_diagnostics) {
    rungs.push_back(
        Json{{"horizon", number(r.horizon)}, {"count", r.count}, {"mean", number(r.mean)}, {"q90", number(r.q90)}});
  }
  return Json{{"verdict_agreement", mc::to_string(s.verdict_agreement)},
              {"ks_distance", number(s.ks_distance)},
              {"ks_threshold", number(s.ks_threshold)},
              {"n_effective_1", s.n_effective_1},
              {"n_effective_2", s.n_effective_2},
              {"exit_side_agreement", number(s.exit_side_agreement)},
              {"exit_frequencies_agree", s.exit_frequencies_agree},
              {"sides", sides},
              {"sample_1", to_json(s.sample_1)},
              {"sample_2", to_json(s.sample_2)},
              {"structural_paths", s.structural_paths},
              {"structural_max_gap", number(s.structural_max_gap)},
              {"tending_threshold", number(s.tending_threshold)},
              {"functional_diagnostics", rungs},
              {"note", s.note}};
}

Json to_json(const timechange::PathRecord& p) {
  auto array = [](const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
  };
  return Json{{"seed", p.seed},
              {"exit", timechange::to_string(p.exit)},
              {"exit_time", optional_number(p.exit_time)},
              {"censored", p.censored},
              {"failed", p.failed},
              {"failure", p.failure},
              {"clamp_count", p.clamp_count},
              {"one_sided_increments", p.one_sided_increments},
              {"times", array(p.times)},
              {"states", array(p.states)},
              {"phi", array(p.phi)}};
}

std::string serialize(const Json& j) { return j.dump(2) + "\n"; }

std::string summary(const feller::ValidationReport& v) {
  std::ostringstream os;
  os << std::left << std::setw(40) << "condition" << std::setw(15) << "status" << "where\n";
  for (const auto& e : v.entries) {
    os << std::setw(40) << e.name << std::setw(15) << feller::to_string(e.status);
    if (e.location) os << "x = " << fmt(*e.location);
    if (!e.detail.empty()) os << (e.location ? "  " : "") << e.detail;
    os << "\n";
  }
  return os.str();
}

std::string summary(const law::BoundaryReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "boundary" << std::setw(26) << "s(e)" << std::setw(26) << "v(e)" << std::setw(26)
     << "v_X(e)" << std::setw(16) << "events" << std::setw(14) << "probability" << "functional\n";
  auto row = [&](const char* name, const quad::IntegrabilityVerdict& s, const quad::IntegrabilityVerdict& v,
                 const quad::IntegrabilityVerdict& vx, law::Events ev, const law::ZeroOneVerdict& z) {
    os << std::setw(10) << name << std::setw(26) << verdict_text(s) << std::setw(26) << verdict_text(v)
       << std::setw(26) << verdict_text(vx) << std::setw(16) << law::to_string(ev) << std::setw(14)
       << law::to_string(z.event_probability) << law::to_string(z.functional) << "\n";
  };
  row("ELL", r.s_ell, r.v_ell, r.vx_ell, r.events.ell_events, r.ell);
  row("R", r.s_r, r.v_r, r.vx_r, r.events.r_events, r.r);
  os << "event A certain: " << to_string(r.events.a_certain) << "\n"
     << "explosion of Y: " << feller::to_string(r.explosion_y.status)
     << ", explosion of X: " << feller::to_string(r.explosion_x.status)
     << ", certain explosion of X: " << feller::to_string(r.certain_explosion_x) << "\n"
     << "consistency: " << to_string(r.consistent) << " (" << r.consistency_note << ")\n";
  return os.str();
}

std::string summary(const mc::VerificationSummary& s, const std::string& title) {
  std::ostringstream os;
  os << title << ": " << mc::to_string(s.verdict_agreement) << "\n";
  if (!s.sides.empty()) {
    os << "  KS " << fmt(s.ks_distance) << " vs threshold " << fmt(s.ks_threshold) << " (n1 = " << s.n_effective_1
       << ", n2 = " << s.n_effective_2 << "), exit-side agreement " << fmt(s.exit_side_agreement) << "\n";
  }
  if (!s.functional_diagnostics.empty()) {
    os << "  " << std::left << std::setw(12) << "horizon" << std::setw(10) << "count" << std::setw(14) << "mean"
       << "q90\n";
    for (const auto& r : s.functional_diagnostics)
      os << "  " << std::setw(12) << fmt(r.horizon) << std::setw(10) << r.count << std::setw(14) << fmt(r.mean)
         << fmt(r.q90) << "\n";
  }
  if (!s.note.empty()) os << "  " << s.note << "\n";
  return os.str();
}

}  // namespace zeroone::report
