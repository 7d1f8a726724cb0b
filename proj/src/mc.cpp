#include "zeroone/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "zeroone/rng.hpp"

namespace zeroone::mc {

using feller::CoefficientSet;
using feller::Endpoint;

const char* to_string(Agreement a) {
  switch (a) {
    case Agreement::Consistent: return "CONSISTENT";
    case Agreement::Contradicts: return "CONTRADICTS";
    case Agreement::Underpowered: return "UNDERPOWERED";
  }
  return "?";
}

void check_config(const CoefficientSet& cs, const SimConfig& cfg) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("simulation config: " + m); };
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) fail("horizon must be positive");
  if (!(cfg.base_step > 0.0)) fail("base_step must be positive");
  if (!(cfg.boundary_band > 0.0 && cfg.boundary_band < 1.0)) fail("boundary_band must lie in (0, 1)");
  if (!(cfg.step_shrink > 0.0 && cfg.step_shrink <= 1.0)) fail("step_shrink must lie in (0, 1]");
  if (cfg.n_paths < 1) fail("n_paths must be at least 1");
  if (!(cs.ell < cfg.L && cfg.L < cfg.R && cfg.R < cs.r)) fail("need ell < L < R < r");
  const double eps = cfg.base_step * std::fabs(cs.sigma(cs.x0));
  if (!(cfg.L < cs.x0 - eps && cs.x0 + eps < cfg.R)) fail("x0 is not strictly inside the window (L, R)");
}

PathOutcome run_path(const CoefficientSet& cs, const SimConfig& cfg, std::uint64_t stream, const Visitor& visit,
                     const std::vector<double>& checkpoints) {
  NormalStream normal(cfg.seed, stream);
  const double h = cfg.base_step, sqrt_h = std::sqrt(h);
  const double band = cfg.boundary_band * (cfg.R - cfg.L);
  const double horizon = cfg.horizon;
  const std::uint64_t budget = static_cast<std::uint64_t>(100.0 * horizon / h) + 1000000;
  auto next_cp = checkpoints.begin();

  PathOutcome out;
  double t = 0.0, y = cs.x0;
  visit(t, y);
  std::uint64_t k = 0;
  for (;;) {
    while (next_cp != checkpoints.end() && *next_cp <= t) ++next_cp;
    if (horizon - t <= 1e-12 * horizon) {
      out.censored = true;
      break;
    }
    if (k >= budget) {
      out.failed = true;
      out.failure = "step budget exhausted";
      break;
    }
    double mu, sg;
    try {
      mu = cs.mu(y);
      sg = cs.sigma(y);
    } catch (const expr::EvalError& e) {
      out.failed = true;
      out.failure = e.what();
      break;
    }
    const double dist = std::min(y - cfg.L, cfg.R - y);
    const double denom = std::fabs(sg) * sqrt_h + std::fabs(mu) * h;
    double dt = denom > 0.0 ? h * std::min(1.0, cfg.step_shrink * dist / denom) : h;
    double tn;
    if (next_cp != checkpoints.end() && *next_cp < horizon && t + dt >= *next_cp) {
      dt = *next_cp - t;
      tn = *next_cp;
    } else if (t + dt >= horizon) {
      dt = horizon - t;
      tn = horizon;
    } else {
      tn = t + dt;
    }
    const double z = normal(k++);
    const double yn = y + mu * dt + sg * std::sqrt(dt) * z;
    if (std::isnan(yn)) {
      out.failed = true;
      out.failure = "non-finite state";
      break;
    }
    if (yn <= cfg.L || yn >= cfg.R) {
      const bool right = yn >= cfg.R;
      const double level = right ? cfg.R : cfg.L;
      if (yn <= cs.ell || yn >= cs.r) ++out.clamp_count;
      // Crossing time by linear interpolation; the state is pulled onto the level.
      const double frac = std::isfinite(yn) ? (level - y) / (yn - y) : 0.0;
      const double te = t + std::clamp(frac, 0.0, 1.0) * dt;
      t = te > t ? te : tn;
      y = level;
      out.exit = right ? Exit::Right : Exit::Left;
      visit(t, y);
      break;
    }
    t = tn;
    y = yn;
    visit(t, y);
    if (y - cfg.L < band || cfg.R - y < band) {
      out.exit = cfg.R - y < band ? Exit::Right : Exit::Left;
      break;
    }
  }
  out.end_time = t;
  out.end_state = y;
  out.steps = k;
  return out;
}

PathRecord simulate_path(const CoefficientSet& cs, const SimConfig& cfg, std::uint64_t path_seed) {
  PathRecord rec;
  rec.seed = path_seed;
  const PathOutcome o = run_path(cs, cfg, path_seed, [&](double t, double y) {
    rec.times.push_back(t);
    rec.states.push_back(y);
  });
  rec.exit = o.exit;
  if (o.exit != Exit::None) rec.exit_time = o.end_time;
  rec.censored = o.censored;
  rec.failed = o.failed;
  rec.failure = o.failure;
  rec.clamp_count = o.clamp_count;
  return rec;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunk = 8;
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= n) return;
      for (std::size_t i = start; i < std::min(n, start + kChunk); ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {

EventFrequencies tally(const std::vector<PathOutcome>& outs) {
  EventFrequencies f;
  f.n = outs.size();
  for (const auto& o : outs) {
    if (o.failed) {
      ++f.failed;
    } else if (o.exit == Exit::Left) {
      ++f.left;
    } else if (o.exit == Exit::Right) {
      ++f.right;
    } else {
      ++f.censored;
    }
    f.clamp_count += o.clamp_count;
  }
  f.left_ci = stats::wilson(f.left, f.n);
  f.right_ci = stats::wilson(f.right, f.n);
  f.censored_ci = stats::wilson(f.censored, f.n);
  return f;
}

// Trapezoidal running integral of an integrand along the visited knots; uses
// the one-sided value where the integrand cannot be evaluated.
struct RunningIntegral {
  explicit RunningIntegral(const expr::Expression& integrand) : g(integrand) {}

  const expr::Expression& g;
  double total = 0.0;
  double t_prev = 0.0;
  std::optional<double> g_prev;
  bool started = false;

  void operator()(double t, double y) {
    std::optional<double> gv;
    try {
      gv = g(y);
    } catch (const expr::EvalError&) {
    }
    if (started) {
      const double dt = t - t_prev;
      double avg;
      if (g_prev && gv) {
        avg = 0.5 * (*g_prev + *gv);
      } else if (g_prev || gv) {
        avg = g_prev ? *g_prev : *gv;
      } else {
        (void)g(y);
        avg = 0.0;
      }
      total += dt * avg;
    }
    started = true;
    t_prev = t;
    g_prev = gv;
  }
};

struct Sample {
  std::vector<PathOutcome> outcomes;
  std::vector<double> values;  // phi at exit, or exit time
};

Sample run_sample(const CoefficientSet& cs, const SimConfig& cfg, std::uint64_t stream_base,
                  const expr::Expression* functional) {
  Sample s;
  s.outcomes.resize(cfg.n_paths);
  s.values.assign(cfg.n_paths, 0.0);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    if (functional) {
      RunningIntegral acc{*functional};
      s.outcomes[i] = run_path(cs, cfg, stream_base + i, [&](double t, double y) { acc(t, y); });
      s.values[i] = acc.total;
    } else {
      s.outcomes[i] = run_path(cs, cfg, stream_base + i, [](double, double) {});
      s.values[i] = s.outcomes[i].end_time;
    }
  });
  return s;
}

std::vector<double> side_values(const Sample& s, Exit side) {
  std::vector<double> v;
  for (std::size_t i = 0; i < s.outcomes.size(); ++i) {
    if (!s.outcomes[i].failed && s.outcomes[i].exit == side) v.push_back(s.values[i]);
  }
  return v;
}

// Bootstrap null distribution of the KS distance at sizes (n1, n2) drawn from
// one pooled sample of the reference law.
double null_threshold(const std::vector<double>& pool, std::size_t n1, std::size_t n2, std::uint64_t seed,
                      const TimeChangeOptions& opts) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<double> ks;
  ks.reserve(opts.null_resamples);
  std::vector<double> a(n1), b(n2);
  for (int r = 0; r < opts.null_resamples; ++r) {
    for (auto& x : a) x = pool[pick(rng)];
    for (auto& x : b) x = pool[pick(rng)];
    ks.push_back(stats::ks_distance(a, b));
  }
  return opts.threshold_factor * stats::quantile(ks, opts.null_quantile);
}

}  // namespace

EventFrequencies estimate_event_probabilities(const CoefficientSet& cs, const SimConfig& cfg) {
  check_config(cs, cfg);
  return tally(run_sample(cs, cfg, 0, nullptr).outcomes);
}

VerificationSummary verify_time_change_identity(const CoefficientSet& cs, const expr::Expression& b2,
                                                const SimConfig& cfg, const std::optional<expr::Expression>& x_b2,
                                                const TimeChangeOptions& opts) {
  check_config(cs, cfg);
  const CoefficientSet xcs = timechange::transformed_coefficients(cs, expr::sqrt(x_b2 ? *x_b2 : b2));
  check_config(xcs, cfg);

  const Sample y = run_sample(cs, cfg, 0, &b2);
  const Sample x = run_sample(xcs, cfg, kStreamX, nullptr);
  const Sample y_null = run_sample(cs, cfg, kStreamNull, &b2);

  VerificationSummary out;
  out.sample_1 = tally(y.outcomes);
  out.sample_2 = tally(x.outcomes);
  out.n_effective_1 = out.sample_1.left + out.sample_1.right;
  out.n_effective_2 = out.sample_2.left + out.sample_2.right;

  std::uint64_t side_seed = cfg.seed * 0x9E3779B97F4A7C15ull + 0x5851F42D4C957F2Dull;
  bool any_evaluated = false, ks_ok = true;
  for (Exit side : {Exit::Left, Exit::Right}) {
    SideComparison sc;
    sc.side = side;
    const auto s1 = side_values(y, side);
    const auto s2 = side_values(x, side);
    sc.n1 = s1.size();
    sc.n2 = s2.size();
    ++side_seed;
    if (sc.n1 >= opts.min_count && sc.n2 >= opts.min_count) {
      sc.evaluated = true;
      any_evaluated = true;
      sc.ks = stats::ks_distance(s1, s2);
      auto pool = s1;
      const auto s1n = side_values(y_null, side);
      pool.insert(pool.end(), s1n.begin(), s1n.end());
      sc.threshold = null_threshold(pool, sc.n1, sc.n2, side_seed, opts);
      if (sc.ks >= sc.threshold) ks_ok = false;
      if (sc.ks >= out.ks_distance) {
        out.ks_distance = sc.ks;
        out.ks_threshold = sc.threshold;
      }
    }
    out.sides.push_back(sc);
  }
  out.exit_frequencies_agree = stats::overlap(out.sample_1.left_ci, out.sample_2.left_ci) &&
                               stats::overlap(out.sample_1.right_ci, out.sample_2.right_ci);

  // Path-by-path: time-change full Y-paths and compare with the streamed phi.
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < y.outcomes.size() && picked.size() < opts.structural_paths; ++i) {
    if (!y.outcomes[i].failed && y.outcomes[i].exit != Exit::None) picked.push_back(i);
  }
  std::vector<char> same_side(picked.size(), 0);
  std::vector<double> gap(picked.size(), 0.0);
  parallel_for(picked.size(), cfg.workers, [&](std::size_t j) {
    const std::size_t i = picked[j];
    const auto rec = timechange::accumulate_phi(simulate_path(cs, cfg, i), b2);
    const auto xp = timechange::time_change_path(rec, {});
    same_side[j] = xp.exit == rec.exit && xp.exit == y.outcomes[i].exit;
    gap[j] = std::fabs(*xp.exit_time - y.values[i]);
  });
  out.structural_paths = picked.size();
  out.exit_side_agreement =
      picked.empty() ? 1.0
                     : static_cast<double>(std::count(same_side.begin(), same_side.end(), 1)) /
                           static_cast<double>(picked.size());
  out.structural_max_gap = gap.empty() ? 0.0 : *std::max_element(gap.begin(), gap.end());

  if (out.n_effective_1 < opts.min_count || out.n_effective_2 < opts.min_count || !any_evaluated) {
    out.verdict_agreement = Agreement::Underpowered;
    out.note = "fewer than " + std::to_string(opts.min_count) + " exited paths in a sample";
  } else if (!ks_ok) {
    out.verdict_agreement = Agreement::Contradicts;
    out.note = "KS distance above the null-calibrated threshold";
  } else if (!out.exit_frequencies_agree) {
    out.verdict_agreement = Agreement::Contradicts;
    out.note = "exit-side frequencies disagree";
  } else if (out.exit_side_agreement != 1.0) {
    out.verdict_agreement = Agreement::Contradicts;
    out.note = "time-changed paths changed exit side";
  } else {
    out.verdict_agreement = Agreement::Consistent;
    out.note = "exit-time laws agree";
  }
  return out;
}

namespace {

// State y* with s(y*) a given fraction of the way from s(x0) to s(level).
double natural_scale_point(const feller::ScaleProfile& p, double x0, double level, double fraction) {
  const double s0 = p.s(x0), s1 = p.s(level);
  const double target = s1 - fraction * (s1 - s0);
  double lo = std::min(x0, level), hi = std::max(x0, level);
  const bool increasing_toward_level = level > x0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((p.s(mid) < target) == increasing_toward_level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

VerificationSummary verify_zero_one_law(const CoefficientSet& cs, const feller::ScaleProfile& profile,
                                        const expr::Expression& f, const SimConfig& cfg,
                                        const std::vector<double>& horizon_ladder, Endpoint boundary,
                                        law::Functional verdict, const ZeroOneOptions& opts) {
  if (verdict != law::Functional::ConvergesAs && verdict != law::Functional::DivergesAs) {
    throw std::invalid_argument("zero-one diagnostic needs a CONVERGES_AS or DIVERGES_AS verdict");
  }
  if (horizon_ladder.empty() || !std::is_sorted(horizon_ladder.begin(), horizon_ladder.end()) ||
      !(horizon_ladder.front() > 0.0)) {
    throw std::invalid_argument("horizon ladder must be increasing and positive");
  }
  SimConfig run = cfg;
  run.horizon = horizon_ladder.back();
  check_config(cs, run);

  const bool right = boundary == Endpoint::R;
  const double level = right ? run.R : run.L;
  const double y_star = natural_scale_point(profile, cs.x0, level, opts.outer_fraction);
  const Exit side = right ? Exit::Right : Exit::Left;
  const std::size_t m = horizon_ladder.size();

  std::vector<std::vector<double>> value(run.n_paths, std::vector<double>(m, 0.0));
  std::vector<std::vector<char>> tending(run.n_paths, std::vector<char>(m, 0));
  parallel_for(run.n_paths, run.workers, [&](std::size_t i) {
    RunningIntegral acc{f};
    std::size_t j = 0;
    auto& vi = value[i];
    auto& ti = tending[i];
    const PathOutcome o = run_path(
        cs, run, i,
        [&](double t, double y) {
          acc(t, y);
          while (j < m && t >= horizon_ladder[j]) {
            vi[j] = acc.total;
            ti[j] = right ? y >= y_star : y <= y_star;
            ++j;
          }
        },
        horizon_ladder);
    // Rungs not reached: the path exited, or stopped a rounding error short
    // of the final horizon.
    const bool exited_here = o.exit == side;
    const bool censored_beyond = o.exit == Exit::None && (right ? o.end_state >= y_star : o.end_state <= y_star);
    for (; j < m; ++j) {
      vi[j] = acc.total;
      ti[j] = exited_here || censored_beyond;
    }
    if (o.failed) std::fill(ti.begin(), ti.end(), 0);
  });

  VerificationSummary out;
  out.tending_threshold = y_star;
  bool underpowered = false;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < run.n_paths; ++i) {
      if (tending[i][j]) xs.push_back(value[i][j]);
    }
    Rung r;
    r.horizon = horizon_ladder[j];
    r.count = xs.size();
    if (!xs.empty()) {
      r.mean = stats::mean(xs);
      r.q90 = stats::quantile(xs, 0.9);
    }
    if (r.count < opts.min_count) underpowered = true;
    out.functional_diagnostics.push_back(r);
  }
  out.n_effective_1 = out.functional_diagnostics.back().count;
  if (underpowered) {
    out.verdict_agreement = Agreement::Underpowered;
    out.note = "fewer than " + std::to_string(opts.min_count) + " boundary-tending paths at some horizon";
    return out;
  }
  bool ok = true;
  const auto& d = out.functional_diagnostics;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    if (verdict == law::Functional::ConvergesAs) {
      const double rel = std::fabs(d[j + 1].q90 - d[j].q90) / std::max(std::fabs(d[j].q90), 1e-300);
      if (!(rel < opts.stabilization_tol)) ok = false;
    } else if (!(d[j + 1].q90 >= opts.growth_factor * d[j].q90)) {
      ok = false;
    }
  }
  out.verdict_agreement = ok ? Agreement::Consistent : Agreement::Contradicts;
  out.note = verdict == law::Functional::ConvergesAs
                 ? (ok ? "0.9-quantile stabilizes across the ladder" : "0.9-quantile keeps moving")
                 : (ok ? "0.9-quantile grows by the growth factor per rung" : "0.9-quantile growth too slow");
  return out;
}

}  // namespace zeroone::mc
