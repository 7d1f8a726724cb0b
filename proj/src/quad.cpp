#include "zeroone/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "zeroone/expr.hpp"

namespace zeroone::quad {

const char* to_string(Status s) {
  switch (s) {
    case Status::Finite: return "FINITE";
    case Status::Infinite: return "INFINITE";
    case Status::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Kronrod 15-point abscissae and weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const Integrand& g, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::fabs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  const double ah = std::fabs(half);
  resk *= half;
  resabs *= ah;
  resasc *= ah;
  double err = std::fabs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  if (!std::isfinite(resk) || !std::isfinite(err)) {
    throw expr::EvalError(expr::EvalErrorKind::Overflow, center, "non-finite quadrature sum");
  }
  return {a, b, resk, err, depth};
}

double allowed(double tol, double rel_tol, double value) { return std::max(tol, rel_tol * std::fabs(value)); }

std::optional<QuadResult> adaptive_gk(const Integrand& g, double a, double b, double tol,
                                      const IntegrateOptions& opts) {
  std::priority_queue<Panel> open;
  double frozen_value = 0.0, frozen_error = 0.0;
  const Panel first = gk15(g, a, b, 0);
  open.push(first);
  double total_value = first.value, total_error = first.error;
  int intervals = 1;
  while (!open.empty()) {
    if (total_error <= allowed(tol, opts.rel_tol, total_value)) return QuadResult{total_value, total_error};
    Panel worst = open.top();
    open.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= opts.max_depth || intervals >= opts.max_intervals || mid <= worst.a ||
        mid >= worst.b) {
      frozen_value += worst.value;
      frozen_error += worst.error;
      continue;
    }
    const Panel left = gk15(g, worst.a, mid, worst.depth + 1);
    const Panel right = gk15(g, mid, worst.b, worst.depth + 1);
    ++intervals;
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    open.push(left);
    open.push(right);
  }
  total_value = frozen_value;
  total_error = frozen_error;
  if (total_error <= allowed(tol, opts.rel_tol, total_value)) return QuadResult{total_value, total_error};
  return std::nullopt;
}

}  // namespace

QuadResult tanh_sinh(const EndpointAwareIntegrand& g, double a, double b, double tol, int max_level) {
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  // Contribution of abscissa t and its mirror -t.
  auto pair_sum = [&](double t, bool include_mirror, bool& exhausted) {
    const double u = kHalfPi * std::sinh(t);
    const double e = std::exp(-2.0 * u);
    const double dist = half * 2.0 * e / (1.0 + e);  // half * (1 - tanh u)
    const double cu = std::cosh(u);
    const double w = half * kHalfPi * std::cosh(t) / (cu * cu);
    if (!(dist > 16.0 * std::numeric_limits<double>::min()) || !(w > 0.0)) {
      exhausted = true;
      return 0.0;
    }
    double s = 0.0;
    auto node = [&](double x, double from_a, double to_b) {
      if (x <= a || x >= b) return 0.0;
      try {
        return w * g(x, from_a, to_b);
      } catch (const expr::EvalError&) {
        if (std::min(from_a, to_b) < 1e-12 * (b - a)) return 0.0;
        throw;
      }
    };
    const double xr = b - dist;
    s += node(xr, (b - a) - dist, dist);
    if (include_mirror) {
      const double xl = a + dist;
      s += node(xl, dist, (b - a) - dist);
    }
    return s;
  };

  double h = 1.0;
  bool exhausted = false;
  double sum = half * kHalfPi * g(center, half, half);
  for (int j = 1;; ++j) {
    exhausted = false;
    sum += pair_sum(j * h, true, exhausted);
    if (exhausted || j > 64) break;
  }
  double estimate = h * sum;
  double error = kInf;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (int j = 1;; j += 2) {
      exhausted = false;
      sum += pair_sum(j * h, true, exhausted);
      if (exhausted || j * h > 8.0) break;
    }
    const double next = h * sum;
    if (!std::isfinite(next)) throw QuadratureFailure("tanh-sinh sum is not finite");
    error = std::fabs(next - estimate);
    estimate = next;
    if (level >= 3 && error <= tol) break;
  }
  return {estimate, error};
}

QuadResult integrate(const Integrand& g, double a, double b, double tol, const IntegrateOptions& opts) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("integrate requires finite a < b");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("integrate requires tol > 0");
  if (auto r = adaptive_gk(g, a, b, tol, opts)) return *r;
  const QuadResult de = tanh_sinh([&](double x, double, double) { return g(x); }, a, b, tol);
  if (de.error <= allowed(tol, opts.rel_tol, de.value)) return de;
  throw QuadratureFailure("no convergence on [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] after maximal subdivision");
}

namespace {

struct LadderPoint {
  double y;
  double log_dist;  // log of the distance coordinate (inverted for infinite ends)
  double value;
};

double least_squares_slope(const std::vector<LadderPoint>& pts, std::size_t from) {
  const std::size_t n = pts.size() - from;
  if (n < 2) return -kInf;
  for (std::size_t i = from; i < pts.size(); ++i) {
    if (pts[i].value == 0.0) return kInf;
  }
  double sx = 0, sy = 0;
  for (std::size_t i = from; i < pts.size(); ++i) {
    sx += pts[i].log_dist;
    sy += std::log(std::fabs(pts[i].value));
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = from; i < pts.size(); ++i) {
    const double dx = pts[i].log_dist - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::fabs(pts[i].value)) - my);
  }
  return sxy / sxx;
}

}  // namespace

IntegrabilityVerdict classify_endpoint(const Integrand& g, double endpoint, Side side, double probe_base,
                                       const ClassifyOptions& opts) {
  if (!(probe_base > 0.0) || !std::isfinite(probe_base)) {
    throw std::invalid_argument("classify_endpoint requires a positive finite probe_base");
  }
  const bool infinite = std::isinf(endpoint);
  if (infinite && ((endpoint > 0) != (side == Side::LeftOf))) {
    throw std::invalid_argument("infinite endpoint approached from the wrong side");
  }
  const double dir = (side == Side::LeftOf) ? 1.0 : -1.0;  // direction of travel toward the endpoint

  std::vector<LadderPoint> pts;
  bool overflow = false;
  for (int k = 0; k <= opts.ladder_length; ++k) {
    double y, log_dist, weight = 1.0;
    if (!infinite) {
      const double d = std::ldexp(probe_base, -k);
      y = endpoint - dir * d;
      log_dist = std::log(d);
    } else {
      const double m = std::ldexp(probe_base, k);
      y = opts.anchor + dir * (m - probe_base);
      log_dist = -std::log(m);
      weight = m * m;
    }
    if (!std::isfinite(y) || y == endpoint || (!pts.empty() && y == pts.back().y)) break;
    try {
      pts.push_back({y, log_dist, g(y) * weight});
    } catch (const expr::EvalError& e) {
      if (e.kind() == expr::EvalErrorKind::Overflow) overflow = true;
      break;
    } catch (const QuadratureFailure&) {
      // The integrand itself could not be resolved this far out.
      break;
    }
    if (!std::isfinite(pts.back().value)) {
      pts.pop_back();
      overflow = true;
      break;
    }
  }

  // Annulus sums between successive probe points.
  std::vector<double> sums, errs;
  const double annulus_tol = opts.tol / (4.0 * std::max(1, opts.ladder_length));
  for (std::size_t k = 0; !overflow && k + 1 < pts.size(); ++k) {
    const double lo = std::min(pts[k].y, pts[k + 1].y);
    const double hi = std::max(pts[k].y, pts[k + 1].y);
    try {
      const QuadResult r = integrate(g, lo, hi, annulus_tol, {.rel_tol = 1e-11});
      sums.push_back(std::fabs(r.value));
      errs.push_back(r.error);
    } catch (const expr::EvalError& e) {
      // Between two good probe points only an overflow is evidence; anything
      // else is an interior defect of the integrand.
      if (e.kind() != expr::EvalErrorKind::Overflow) throw;
      overflow = true;
      pts.resize(k + 1);
    } catch (const QuadratureFailure&) {
      pts.resize(k + 1);
    }
  }
  if (pts.size() > sums.size() + 1) pts.resize(sums.size() + 1);

  IntegrabilityVerdict v;
  double partial = 0.0;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    partial += sums[k];
    v.evidence.emplace_back(static_cast<int>(k), partial);
  }
  const double slope = least_squares_slope(pts, pts.size() / 2);

  if (overflow) {
    v.status = Status::Infinite;
    v.divergence_exponent = slope;
    v.evidence.emplace_back(static_cast<int>(sums.size()), kInf);
    return v;
  }
  if (static_cast<int>(pts.size()) < opts.min_points) {
    throw InsufficientData("only " + std::to_string(pts.size()) + " usable probe points near endpoint " +
                           std::to_string(endpoint));
  }

  double scale = pts.empty() ? 0.0 : std::fabs(pts.front().value) * probe_base;
  if (!(scale > 0.0)) scale = probe_base;
  const bool exceeded = partial > opts.divergence_factor * scale;

  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < sums.size(); ++k) {
    if (sums[k] == 0.0) {
      ratios.push_back(sums[k + 1] == 0.0 ? 0.0 : kInf);
    } else {
      ratios.push_back(sums[k + 1] / sums[k]);
    }
  }
  const std::size_t window = std::min<std::size_t>(opts.stall_levels, ratios.size());
  const auto tail_begin = ratios.end() - static_cast<std::ptrdiff_t>(window);
  const bool non_decaying = static_cast<int>(ratios.size()) >= opts.stall_levels &&
                            std::all_of(tail_begin, ratios.end(),
                                        [&](double r) { return r >= 1.0 - opts.stall_slack; });
  const bool cauchy = window >= 2 && std::all_of(tail_begin, ratios.end(),
                                                 [&](double r) { return r < 1.0 - opts.stall_slack; });

  if (exceeded || non_decaying || slope < -1.0 - opts.margin) {
    v.status = Status::Infinite;
    v.divergence_exponent = slope;
    return v;
  }
  if (slope > -1.0 + opts.margin && cauchy) {
    // Geometric extrapolation of the remaining annuli.
    const double r_last = ratios.back();
    const double r_prev = ratios[ratios.size() - 2];
    const double s_last = sums.back();
    const double tail = s_last * r_last / (1.0 - r_last);
    const double tail_alt = s_last * r_prev / (1.0 - r_prev);
    double err = std::fabs(tail - tail_alt);
    for (double e : errs) err += e;
    const double value = partial + tail;
    if (err <= opts.tol * std::max(1.0, std::fabs(value))) {
      v.status = Status::Finite;
      v.value = value;
      v.error_estimate = err;
      return v;
    }
  }
  v.status = Status::Indeterminate;
  v.divergence_exponent = slope;
  if (v.evidence.empty()) v.evidence.emplace_back(0, partial);
  return v;
}

namespace {

// Value of the integral over a piece with at most one infinite end.
QuadResult de_value(const Integrand& g, double a, double b, double tol) {
  if (std::isinf(b) && std::isinf(a)) throw std::logic_error("de_value needs a finite end");
  if (std::isinf(b)) {
    // y = a + t/(1-t), dy = dt/(1-t)^2
    return tanh_sinh(
        [&](double, double t, double one_minus_t) {
          const double y = a + t / one_minus_t;
          if (std::isinf(y)) return 0.0;
          const double gy = g(y);
          if (gy == 0.0) return 0.0;
          return gy / (one_minus_t * one_minus_t);
        },
        0.0, 1.0, tol);
  }
  if (std::isinf(a)) {
    // y = b - (1-t)/t, dy = dt/t^2
    return tanh_sinh(
        [&](double, double t, double one_minus_t) {
          const double y = b - one_minus_t / t;
          if (std::isinf(y)) return 0.0;
          const double gy = g(y);
          if (gy == 0.0) return 0.0;
          return gy / (t * t);
        },
        0.0, 1.0, tol);
  }
  return tanh_sinh([&](double, double from_a, double to_b) { return g(from_a < to_b ? a + from_a : b - to_b); },
                   a, b, tol);
}

}  // namespace

IntegrabilityVerdict integrate_improper(const Integrand& g, double a, double b, EndFlags ends, double tol,
                                        const ClassifyOptions& opts) {
  if (!(a < b)) throw std::invalid_argument("integrate_improper requires a < b");
  const bool left = ends.left_singular || std::isinf(a);
  const bool right = ends.right_singular || std::isinf(b);
  IntegrabilityVerdict out;
  if (!left && !right) {
    const QuadResult r = integrate(g, a, b, tol, {.rel_tol = tol});
    out.status = Status::Finite;
    out.value = r.value;
    out.error_estimate = r.error;
    return out;
  }

  double split;
  if (left && right) {
    if (!std::isinf(a) && !std::isinf(b)) {
      split = 0.5 * (a + b);
    } else if (!std::isinf(a)) {
      split = a + std::max(1.0, std::fabs(a));
    } else if (!std::isinf(b)) {
      split = b - std::max(1.0, std::fabs(b));
    } else {
      split = 0.0;
    }
  } else {
    split = left ? b : a;
  }

  ClassifyOptions copts = opts;
  copts.tol = tol;
  auto side_verdict = [&](double endpoint, Side side) {
    double probe;
    if (std::isinf(endpoint)) {
      copts.anchor = split;
      probe = std::max(1.0, std::fabs(split));
    } else {
      probe = std::fabs(endpoint - split);
    }
    return classify_endpoint(g, endpoint, side, probe, copts);
  };

  std::vector<IntegrabilityVerdict> parts;
  if (left) parts.push_back(side_verdict(a, Side::RightOf));
  if (right) parts.push_back(side_verdict(b, Side::LeftOf));

  for (const auto& p : parts) {
    if (p.status == Status::Infinite) return p;
  }
  for (const auto& p : parts) {
    if (p.status == Status::Indeterminate) return p;
  }

  double ladder_value = 0.0, ladder_error = 0.0;
  for (const auto& p : parts) {
    ladder_value += *p.value;
    ladder_error += *p.error_estimate;
  }
  out.status = Status::Finite;
  out.value = ladder_value;
  out.error_estimate = ladder_error;
  try {
    QuadResult de{0.0, 0.0};
    const double pieces = (std::isinf(a) && std::isinf(b)) ? 2.0 : 1.0;
    if (pieces == 2.0) {
      const QuadResult l = de_value(g, a, split, tol / 2);
      const QuadResult r = de_value(g, split, b, tol / 2);
      de = {l.value + r.value, l.error + r.error};
    } else {
      de = de_value(g, a, b, tol);
    }
    const double allowed_err = tol * std::max(1.0, std::fabs(de.value));
    if (std::isfinite(de.value) && de.error <= allowed_err) {
      out.value = de.value;
      out.error_estimate = de.error;
    }
  } catch (const expr::EvalError&) {
  } catch (const QuadratureFailure&) {
  }
  return out;
}

}  // namespace zeroone::quad
