#include "zeroone/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zeroone::timechange {

const char* to_string(Exit e) {
  switch (e) {
    case Exit::None: return "NONE";
    case Exit::Left: return "LEFT";
    case Exit::Right: return "RIGHT";
  }
  return "?";
}

feller::CoefficientSet transformed_coefficients(const feller::CoefficientSet& cs, const expr::Expression& b) {
  feller::Tolerances tol;
  const auto rep = feller::validate_conditions(cs, b, tol);
  for (const auto& e : rep.entries) {
    if (e.name == "b_nonzero" && e.status != feller::Check::Pass) {
      throw std::invalid_argument("time change requires b != 0 on J: " + e.detail);
    }
  }
  return {cs.mu / (b * b), cs.sigma / b, cs.ell, cs.r, cs.c, cs.x0};
}

PathRecord accumulate_phi(PathRecord path, const expr::Expression& b_squared) {
  const std::size_t n = path.times.size();
  if (n == 0 || path.states.size() != n) throw std::invalid_argument("path grid and states differ in length");
  auto eval = [&](std::size_t k) -> std::optional<double> {
    try {
      return b_squared(path.states[k]);
    } catch (const expr::EvalError&) {
      return std::nullopt;
    }
  };
  path.phi.assign(n, 0.0);
  path.one_sided_increments = 0;
  std::optional<double> prev = eval(0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = path.times[k + 1] - path.times[k];
    if (!(dt > 0.0)) throw std::invalid_argument("path times must be strictly increasing");
    const std::optional<double> next = eval(k + 1);
    double avg;
    if (prev && next) {
      avg = 0.5 * (*prev + *next);
    } else if (prev || next) {
      avg = prev ? *prev : *next;
      ++path.one_sided_increments;
    } else {
      // Neither end evaluates: surface the genuine error.
      (void)b_squared(path.states[k]);
      throw std::logic_error("unreachable");
    }
    path.phi[k + 1] = path.phi[k] + dt * avg;
    prev = next;
  }
  return path;
}

InverseTime inverse_time(const PathRecord& path, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("inverse_time requires t >= 0");
  if (path.phi.empty()) throw std::invalid_argument("inverse_time requires phi");
  const auto& phi = path.phi;
  const double top = phi.back();
  if (path.exit != Exit::None && t >= top) return {InverseTime::Kind::Infinite, 0.0};
  if (t > top) return {InverseTime::Kind::Censored, 0.0};
  if (t == top) return {InverseTime::Kind::Finite, path.times.back()};
  // First knot with phi > t; the answer lies in [k-1, k].
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(phi.begin(), phi.end(), t) - phi.begin());
  const std::size_t j = k - 1;
  if (phi[j] == t) return {InverseTime::Kind::Finite, path.times[j]};
  const double w = (t - phi[j]) / (phi[k] - phi[j]);
  return {InverseTime::Kind::Finite, path.times[j] + w * (path.times[k] - path.times[j])};
}

namespace {

double state_at(const PathRecord& path, double time) {
  const auto& ts = path.times;
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), time) - ts.begin());
  if (k == 0) return path.states.front();
  if (k >= ts.size()) return path.states.back();
  const std::size_t j = k - 1;
  const double w = (time - ts[j]) / (ts[k] - ts[j]);
  return path.states[j] + w * (path.states[k] - path.states[j]);
}

}  // namespace

PathRecord time_change_path(const PathRecord& path, const std::vector<double>& grid) {
  if (path.phi.size() != path.times.size()) throw std::invalid_argument("time_change_path requires phi");
  PathRecord out;
  out.seed = path.seed;
  out.exit = path.exit;
  out.censored = path.censored;
  out.clamp_count = path.clamp_count;
  out.failed = path.failed;
  out.failure = path.failure;
  double last = -1.0;
  for (double t : grid) {
    if (!(t > last)) throw std::invalid_argument("time-change grid must be strictly increasing");
    last = t;
    const InverseTime T = inverse_time(path, t);
    if (T.kind == InverseTime::Kind::Infinite) break;
    if (T.kind == InverseTime::Kind::Censored) {
      ++out.censored_samples;
      continue;
    }
    out.times.push_back(t);
    out.states.push_back(state_at(path, T.value));
  }
  if (path.exit != Exit::None) {
    const double zeta_x = path.phi.back();
    if (out.times.empty() || out.times.back() < zeta_x) {
      out.times.push_back(zeta_x);
      out.states.push_back(path.states.back());
    } else {
      out.states.back() = path.states.back();
    }
    out.exit_time = zeta_x;
  }
  return out;
}

}  // namespace zeroone::timechange
