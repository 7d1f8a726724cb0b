#include "zeroone/feller.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <boost/numeric/odeint.hpp>

namespace zeroone::feller {

using expr::EvalError;
using expr::EvalErrorKind;
using expr::Expression;
using quad::IntegrabilityVerdict;
using quad::Status;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Knot ladder depth on each side of c.
constexpr int kKnotLevels = 120;
constexpr int kMaxPanels = 4000;
}  // namespace

const char* to_string(Endpoint e) { return e == Endpoint::Ell ? "ell" : "r"; }

const char* to_string(Check c) {
  switch (c) {
    case Check::Pass: return "PASS";
    case Check::Fail: return "FAIL";
    case Check::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

const char* to_string(Explosion e) {
  switch (e) {
    case Explosion::NoExplosionAs: return "NO_EXPLOSION_AS";
    case Explosion::ExplodesWithPositiveProb: return "EXPLODES_WITH_POSITIVE_PROB";
    case Explosion::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

const char* to_string(Certainty c) {
  switch (c) {
    case Certainty::Certain: return "CERTAIN";
    case Certainty::NotCertain: return "NOT_CERTAIN";
    case Certainty::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

double default_reference_point(double ell, double r, double x0) {
  if (std::isfinite(ell) && std::isfinite(r)) return 0.5 * (ell + r);
  return x0;
}

CoefficientSet CoefficientSet::make(Expression mu, Expression sigma, double ell, double r, double x0,
                                    std::optional<double> c) {
  if (!(ell < r)) throw std::invalid_argument("state interval requires ell < r");
  if (std::isnan(ell) || std::isnan(r) || ell == kInf || r == -kInf) {
    throw std::invalid_argument("malformed state interval");
  }
  if (!(ell < x0 && x0 < r) || !std::isfinite(x0)) throw std::invalid_argument("x0 must lie inside J");
  const double cc = c ? *c : default_reference_point(ell, r, x0);
  if (!(ell < cc && cc < r) || !std::isfinite(cc)) throw std::invalid_argument("c must lie inside J");
  return {std::move(mu), std::move(sigma), ell, r, cc, x0};
}

std::vector<double> probe_grid(const CoefficientSet& cs, int n) {
  std::vector<double> out;
  out.reserve(n + 2);
  const bool lf = std::isfinite(cs.ell), rf = std::isfinite(cs.r);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    double y;
    if (lf && rf) {
      y = cs.ell + t * (cs.r - cs.ell);
    } else if (lf) {
      y = cs.ell + (cs.c - cs.ell) * t / (1.0 - t);
    } else if (rf) {
      y = cs.r - (cs.r - cs.c) * (1.0 - t) / t;
    } else {
      const double u = 2.0 * t - 1.0;
      y = cs.c + std::max(1.0, std::fabs(cs.c)) * u / (1.0 - std::fabs(u));
    }
    if (y > cs.ell && y < cs.r) out.push_back(y);
  }
  out.push_back(cs.c);
  out.push_back(cs.x0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ValidationReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.status == Check::Pass; });
}

bool ValidationReport::any_fail() const {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.status == Check::Fail; });
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

bool zeros_precede_underflow(const Expression& e, const std::vector<double>& grid, std::size_t i) {
  for (std::size_t j = i + 1; j < grid.size(); ++j) {
    double v;
    try {
      v = e(grid[j]);
    } catch (const EvalError&) {
      return false;
    }
    if (v != 0.0) return std::fabs(v) < 1e-100;
  }
  return false;
}

namespace {

ConditionEntry check_nonzero(const std::string& name, const Expression& e, const std::vector<double>& grid) {
  ConditionEntry entry{name, Check::Pass, "no zero on " + std::to_string(grid.size()) + " probe points", {}};
  double prev_x = 0.0, prev_v = 0.0;
  bool have_prev = false, in_underflow = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    double v;
    try {
      v = e(x);
    } catch (const EvalError& err) {
      // Overflow still certifies a nonzero value.
      if (err.kind() == EvalErrorKind::Overflow) continue;
      return {name, Check::Fail, err.what(), x};
    }
    if (v == 0.0) {
      // A zero reached by decay through tiny magnitudes is underflow.
      in_underflow = in_underflow || (have_prev && std::fabs(prev_v) < 1e-100) || zeros_precede_underflow(e, grid, i);
      if (in_underflow) continue;
      return {name, Check::Fail, "zero at x = " + fmt(x), x};
    }
    in_underflow = false;
    if (have_prev && (v > 0) != (prev_v > 0)) {
      // Sign change: bisect for the crossing.
      double lo = prev_x, hi = x, vlo = prev_v;
      for (int it = 0; it < 200 && lo < hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double vm;
        try {
          vm = e(mid);
        } catch (const EvalError&) {
          hi = mid;
          break;
        }
        if (vm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((vm > 0) == (vlo > 0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      const double loc = 0.5 * (lo + hi);
      return {name, Check::Fail, "sign change, zero near x = " + fmt(loc), loc};
    }
    prev_x = x;
    prev_v = v;
    have_prev = true;
  }
  return entry;
}

// Integrability on the compacts [a_k, b_k] exhausting J.
ConditionEntry check_local_integrability(const std::string& name, const quad::Integrand& g,
                                         const CoefficientSet& cs, const Tolerances& tol) {
  const bool lf = std::isfinite(cs.ell), rf = std::isfinite(cs.r);
  int passed = 0;
  double last_a = cs.c, last_b = cs.c;
  for (int k = 2; k <= tol.compact_levels; ++k) {
    double a, b;
    if (lf && rf) {
      a = cs.ell + std::ldexp(cs.r - cs.ell, -k);
      b = cs.r - std::ldexp(cs.r - cs.ell, -k);
    } else {
      // Infinite ends grow by sqrt(2) per level so overflow of fast-growing
      // coefficients is met only after several compacts.
      const double reach = std::max(1.0, std::fabs(cs.c)) * std::pow(2.0, 0.5 * k);
      a = lf ? cs.ell + std::ldexp(cs.c - cs.ell, -k) : cs.c - reach;
      b = rf ? cs.r - std::ldexp(cs.r - cs.c, -k) : cs.c + reach;
    }
    if (!(a < b)) continue;
    try {
      (void)quad::integrate(g, a, b, 1e-300, {.rel_tol = 1e-8});
    } catch (const EvalError& err) {
      if (err.kind() == EvalErrorKind::Overflow) break;
      return {name, Check::Fail, std::string(err.what()) + " on [" + fmt(a) + ", " + fmt(b) + "]",
              err.abscissa()};
    } catch (const quad::QuadratureFailure& err) {
      return {name, Check::Fail, std::string("not integrable on [") + fmt(a) + ", " + fmt(b) + "]: " + err.what(),
              std::nullopt};
    }
    ++passed;
    last_a = a;
    last_b = b;
  }
  const std::string span = "integrable on " + std::to_string(passed) + " nested compacts up to [" + fmt(last_a) +
                           ", " + fmt(last_b) + "]";
  if (passed >= 8) return {name, Check::Pass, span, std::nullopt};
  return {name, Check::Indeterminate, span, std::nullopt};
}

double checked_ratio(double num, double den, double x) {
  if (den == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, x, "coefficient quotient");
  const double v = num / den;
  if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, x, "coefficient quotient");
  return v;
}

// Unresolvable quadrature is reported as an undecided verdict, not an error.
IntegrabilityVerdict guarded_improper(const quad::Integrand& g, double a, double b, quad::EndFlags flags,
                                      const Tolerances& tol) {
  try {
    return quad::integrate_improper(g, a, b, flags, tol.tol, tol.classify);
  } catch (const quad::InsufficientData&) {
  } catch (const quad::QuadratureFailure&) {
  }
  IntegrabilityVerdict v;
  v.status = Status::Indeterminate;
  return v;
}

}  // namespace

ValidationReport validate_conditions(const CoefficientSet& cs, const std::optional<Expression>& b,
                                     const Tolerances& tol) {
  ValidationReport rep;
  const auto grid = probe_grid(cs, tol.probe_points);
  rep.entries.push_back(check_nonzero("sigma_nonzero", cs.sigma, grid));
  const bool sigma_ok = rep.entries.back().status == Check::Pass;
  auto sigma2 = [&](double x) {
    const double s = cs.sigma(x);
    const double s2 = s * s;
    if (!std::isfinite(s2)) throw EvalError(EvalErrorKind::Overflow, x, "sigma^2");
    return s2;
  };
  if (sigma_ok) {
    rep.entries.push_back(check_local_integrability(
        "inv_sigma2_locally_integrable", [&](double x) { return checked_ratio(1.0, sigma2(x), x); }, cs, tol));
    rep.entries.push_back(check_local_integrability(
        "mu_over_sigma2_locally_integrable", [&](double x) { return checked_ratio(cs.mu(x), sigma2(x), x); }, cs,
        tol));
  } else {
    rep.entries.push_back({"inv_sigma2_locally_integrable", Check::Fail, "sigma vanishes in J", std::nullopt});
    rep.entries.push_back({"mu_over_sigma2_locally_integrable", Check::Fail, "sigma vanishes in J", std::nullopt});
  }
  if (b) {
    rep.entries.push_back(check_nonzero("b_nonzero", *b, grid));
    if (sigma_ok) {
      rep.entries.push_back(check_local_integrability(
          "b2_over_sigma2_locally_integrable",
          [&](double x) {
            const double bv = (*b)(x);
            return checked_ratio(bv * bv, sigma2(x), x);
          },
          cs, tol));
    } else {
      rep.entries.push_back({"b2_over_sigma2_locally_integrable", Check::Fail, "sigma vanishes in J", std::nullopt});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Scale profile

struct ScaleProfile::Impl {
  CoefficientSet cs;
  Tolerances tol;
  std::vector<double> y;   // ascending knots
  std::size_t ic = 0;      // index of c
  std::vector<double> dI;  // dI[j] = int_{y_j}^{y_{j+1}} rate
  std::vector<double> I;   // drift integral at knots
  std::vector<double> s;   // scale function at knots (+-inf once out of range)
  std::vector<double> kr;  // (s(r) - s(y_j)) / s'(y_j)
  std::vector<double> kl;  // (s(y_j) - s(ell)) / s'(y_j)
  IntegrabilityVerdict s_ell, s_r;

  double rate(double x) const {
    const double sg = cs.sigma(x);
    return 2.0 * checked_ratio(cs.mu(x), sg * sg, x);
  }

  // Signed int_a^z rate.
  double local_integral(double a, double z) const {
    if (a == z) return 0.0;
    const double lo = std::min(a, z), hi = std::max(a, z);
    const double v =
        quad::integrate([this](double x) { return rate(x); }, lo, hi, 1e-15, {.rel_tol = 1e-13})
            .value;
    return z > a ? v : -v;
  }

  // One panel [pos, next]: solves E' = sign * rate, F' = w exp(-E) along the
  // panel with F scaled to O(1). Returns (F, E) at the far end.
  std::pair<double, double> panel_ode(double pos, double next, double sign, const Expression* w) const {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;
    const double dir = next > pos ? 1.0 : -1.0;
    const double hp = std::fabs(next - pos);
    double fref = hp;
    if (w) {
      try {
        const double w0 = std::fabs((*w)(pos));
        if (w0 > 0.0 && std::isfinite(w0)) fref = hp * w0;
      } catch (const EvalError&) {
      }
    }
    if (!(fref > 0.0) || !std::isfinite(fref)) fref = 1.0;
    auto system = [&](const State& x, State& dxds, double s) {
      const double z = s >= 1.0 ? next : pos + dir * hp * s;
      dxds[0] = sign * dir * hp * rate(z);
      const double v = std::exp(-x[0]);
      if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, z, "scale density ratio");
      const double f = (w ? (*w)(z) : 1.0) * v * hp / fref;
      if (!std::isfinite(f)) throw EvalError(EvalErrorKind::Overflow, z, "scale integral");
      dxds[1] = f;
    };
    State x{0.0, 0.0};
    try {
      ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-12, ode::runge_kutta_dopri5<State>()), system, x, 0.0,
                              1.0, 1.0 / 16);
    } catch (const EvalError&) {
      throw;
    } catch (const std::runtime_error& err) {
      throw quad::QuadratureFailure(std::string("scale integral: ") + err.what());
    }
    return {x[1] * fref, x[0]};
  }

  // Positive-measure integral over the segment between start and stop of
  //   w(z) exp(-sign * int_start^z rate) dz,
  // marched outward from start on geometrically growing panels.
  double panelled(double start, double stop, double sign, const Expression* w) const {
    if (start == stop) return 0.0;
    const double dir = stop > start ? 1.0 : -1.0;
    const double width = std::fabs(stop - start);
    double h = width;
    try {
      const double r0 = std::fabs(rate(start));
      if (r0 > 0.0) h = std::min(width, 0.5 / r0);
    } catch (const EvalError&) {
    }
    h = std::max(h, std::ldexp(width, -50));
    double pos = start, E = 0.0, total = 0.0;
    for (int panel = 0; panel < kMaxPanels; ++panel) {
      const double remaining = std::fabs(stop - pos);
      const double next = remaining <= h ? stop : pos + dir * h;
      const double scale = std::exp(-E);
      if (!std::isfinite(scale)) throw EvalError(EvalErrorKind::Overflow, pos, "scale density ratio");
      const auto [piece, dE] = panel_ode(pos, next, sign, w);
      total += scale * piece;
      if (!std::isfinite(total)) throw EvalError(EvalErrorKind::Overflow, pos, "scale integral");
      E += dE;
      pos = next;
      if (pos == stop) return total;
      const double tail_scale = std::exp(-E);
      bool decaying = false;
      try {
        decaying = sign * dir * rate(pos) > 0.0;
      } catch (const EvalError&) {
      }
      if (decaying && total > 0.0) {
        double wabs = 1.0;
        if (w) {
          try {
            wabs = std::fabs((*w)(pos));
          } catch (const EvalError&) {
          }
        }
        if (tail_scale * wabs * std::fabs(stop - pos) < 1e-17 * total) return total;
      }
      h *= 2.0;
    }
    throw quad::QuadratureFailure("scale integral did not settle");
  }

  double frame_integral(double from, double to) const { return panelled(from, to, 1.0, nullptr); }

  // Index of the knot between c and x that is nearest to x.
  std::size_t anchor_index(double x) const {
    if (x >= cs.c) {
      auto it = std::upper_bound(y.begin() + static_cast<std::ptrdiff_t>(ic), y.end(), x);
      return static_cast<std::size_t>(it - y.begin()) - 1;
    }
    auto it = std::lower_bound(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(ic), x);
    return static_cast<std::size_t>(it - y.begin());
  }

  double drift_integral(double x) const {
    const std::size_t j = anchor_index(x);
    return I[j] + local_integral(y[j], x);
  }

  double tail(Endpoint e, double x) const {
    const auto& table = e == Endpoint::R ? kr : kl;
    if (table.empty()) throw std::logic_error("scale function is not finite at this endpoint");
    if (e == Endpoint::R) {
      auto it = std::upper_bound(y.begin(), y.end(), x);
      if (it == y.begin()) throw EvalError(EvalErrorKind::Domain, x, "outside the tabulated profile");
      const std::size_t j = static_cast<std::size_t>(it - y.begin()) - 1;
      if (y[j] == x) return finite_or_throw(table[j], x);
      if (j + 1 >= y.size()) throw EvalError(EvalErrorKind::Domain, x, "beyond the resolved profile");
      return combine(x, y[j + 1], table[j + 1]);
    }
    auto it = std::lower_bound(y.begin(), y.end(), x);
    if (it == y.end()) throw EvalError(EvalErrorKind::Domain, x, "outside the tabulated profile");
    const std::size_t j = static_cast<std::size_t>(it - y.begin());
    if (y[j] == x) return finite_or_throw(table[j], x);
    if (j == 0) throw EvalError(EvalErrorKind::Domain, x, "beyond the resolved profile");
    return combine(x, y[j - 1], table[j - 1]);
  }

  static double finite_or_throw(double v, double x) {
    if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, x, "tabulated profile value");
    return v;
  }

  // K(x) = int_x^knot exp(-int_x^z rate) dz + exp(-int_x^knot rate) K(knot)
  double combine(double x, double knot, double k_knot) const {
    finite_or_throw(k_knot, knot);
    const double w = std::exp(-local_integral(x, knot));
    const double v = frame_integral(x, knot) + w * k_knot;
    return finite_or_throw(v, x);
  }
};

ScaleProfile ScaleProfile::build(const CoefficientSet& cs, const Tolerances& tol) {
  auto impl = std::make_shared<Impl>();
  impl->cs = cs;
  impl->tol = tol;

  std::vector<double> right, left;
  const double hr = std::max(1.0, std::fabs(cs.c));
  for (int k = 1; k <= kKnotLevels; ++k) {
    double x;
    if (std::isfinite(cs.r)) {
      x = cs.r - std::ldexp(cs.r - cs.c, -k);
      if (x >= cs.r || (!right.empty() && x == right.back())) break;
    } else {
      x = cs.c + hr * (std::ldexp(1.0, k) - 1.0);
    }
    right.push_back(x);
  }
  for (int k = 1; k <= kKnotLevels; ++k) {
    double x;
    if (std::isfinite(cs.ell)) {
      x = cs.ell + std::ldexp(cs.c - cs.ell, -k);
      if (x <= cs.ell || (!left.empty() && x == left.back())) break;
    } else {
      x = cs.c - hr * (std::ldexp(1.0, k) - 1.0);
    }
    left.push_back(x);
  }

  // March outward from c; a side is cut where the coefficients stop being
  // integrable in floating point.
  auto march = [&](const std::vector<double>& pts, std::vector<double>& dIs, std::vector<double>& Is,
                   std::vector<double>& ss, std::vector<double>& kept) {
    double prev = cs.c, Iprev = 0.0, sprev = 0.0;
    for (double x : pts) {
      double d;
      try {
        d = impl->local_integral(prev, x);
      } catch (const EvalError&) {
        break;
      } catch (const quad::QuadratureFailure&) {
        break;
      }
      const double Ix = Iprev + d;
      double sx = sprev;
      if (std::isfinite(sprev)) {
        try {
          const double frame = impl->frame_integral(prev, x);
          const double sc = std::exp(-Iprev);
          sx = sprev + (x > prev ? 1.0 : -1.0) * sc * frame;
        } catch (const EvalError&) {
          sx = x > prev ? kInf : -kInf;
        } catch (const quad::QuadratureFailure&) {
          break;
        }
        if (!std::isfinite(sx)) sx = x > prev ? kInf : -kInf;
      }
      kept.push_back(x);
      dIs.push_back(d);
      Is.push_back(Ix);
      ss.push_back(sx);
      prev = x;
      Iprev = Ix;
      sprev = sx;
    }
  };
  std::vector<double> rdI, rI, rs, rk, ldI, lI, ls, lk;
  march(right, rdI, rI, rs, rk);
  march(left, ldI, lI, ls, lk);

  // Assemble ascending arrays.
  const std::size_t nl = lk.size();
  impl->y.assign(lk.rbegin(), lk.rend());
  impl->I.assign(lI.rbegin(), lI.rend());
  impl->s.assign(ls.rbegin(), ls.rend());
  impl->ic = nl;
  impl->y.push_back(cs.c);
  impl->I.push_back(0.0);
  impl->s.push_back(0.0);
  impl->y.insert(impl->y.end(), rk.begin(), rk.end());
  impl->I.insert(impl->I.end(), rI.begin(), rI.end());
  impl->s.insert(impl->s.end(), rs.begin(), rs.end());
  // dI between ascending neighbours.
  impl->dI.assign(impl->y.size() - 1, 0.0);
  for (std::size_t i = 0; i < nl; ++i) impl->dI[nl - 1 - i] = -ldI[i];
  for (std::size_t i = 0; i < rdI.size(); ++i) impl->dI[nl + i] = rdI[i];

  const Impl& P = *impl;
  auto s_prime = [&P](double x) {
    const double v = std::exp(-P.drift_integral(x));
    if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, x, "scale density");
    return v;
  };
  impl->s_r = guarded_improper(s_prime, cs.c, cs.r, {false, true}, tol);
  impl->s_ell = guarded_improper(s_prime, cs.ell, cs.c, {true, false}, tol);

  const std::size_t n = impl->y.size();
  auto extrapolated = [](double cell, double rho, double tau) {
    const double q = tau * rho;
    if (!(q < 1.0) || !std::isfinite(cell)) return kInf;
    return cell * tau / (1.0 - q);
  };
  auto safe = [](auto&& f) {
    try {
      return f();
    } catch (const EvalError&) {
      return kInf;
    } catch (const quad::QuadratureFailure&) {
      return kInf;
    }
  };
  if (impl->s_r.status == Status::Finite && n >= 3 && n - 1 > impl->ic + 1) {
    std::vector<double> kr(n, kInf);
    const double tau = std::isfinite(cs.r) ? 0.5 : 2.0;
    kr[n - 1] = safe([&] {
      return extrapolated(P.frame_integral(P.y[n - 2], P.y[n - 1]), std::exp(-P.dI[n - 2]), tau);
    });
    for (std::size_t j = n - 1; j-- > 0;) {
      kr[j] = safe([&] {
        if (!std::isfinite(kr[j + 1])) return kInf;
        return P.frame_integral(P.y[j], P.y[j + 1]) + std::exp(-P.dI[j]) * kr[j + 1];
      });
    }
    impl->kr = std::move(kr);
  }
  if (impl->s_ell.status == Status::Finite && n >= 3 && impl->ic >= 2) {
    std::vector<double> kl(n, kInf);
    const double tau = std::isfinite(cs.ell) ? 0.5 : 2.0;
    kl[0] = safe([&] { return extrapolated(P.frame_integral(P.y[1], P.y[0]), std::exp(P.dI[0]), tau); });
    for (std::size_t j = 1; j < n; ++j) {
      kl[j] = safe([&] {
        if (!std::isfinite(kl[j - 1])) return kInf;
        return P.frame_integral(P.y[j], P.y[j - 1]) + std::exp(P.dI[j - 1]) * kl[j - 1];
      });
    }
    impl->kl = std::move(kl);
  }

  ScaleProfile out;
  out.impl_ = std::move(impl);
  return out;
}

const CoefficientSet& ScaleProfile::coefficients() const { return impl_->cs; }
const Tolerances& ScaleProfile::tolerances() const { return impl_->tol; }
double ScaleProfile::drift_rate(double y) const { return impl_->rate(y); }
double ScaleProfile::drift_integral(double y) const { return impl_->drift_integral(y); }

double ScaleProfile::s_prime(double y) const {
  const double v = std::exp(-impl_->drift_integral(y));
  if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, y, "scale density");
  return v;
}

double ScaleProfile::s(double y) const {
  const Impl& P = *impl_;
  const std::size_t j = P.anchor_index(y);
  if (y == P.y[j]) return Impl::finite_or_throw(P.s[j], y);
  const double base = Impl::finite_or_throw(P.s[j], P.y[j]);
  const double sc = std::exp(-P.I[j]);
  const double v = base + (y > P.y[j] ? 1.0 : -1.0) * sc * P.frame_integral(P.y[j], y);
  return Impl::finite_or_throw(v, y);
}

const IntegrabilityVerdict& ScaleProfile::s_at(Endpoint e) const {
  return e == Endpoint::Ell ? impl_->s_ell : impl_->s_r;
}

double ScaleProfile::tail_ratio(Endpoint e, double y) const { return impl_->tail(e, y); }

ScaleProfile::NestedTable ScaleProfile::nested(const Expression& weight) const {
  const Impl& P = *impl_;
  const std::size_t n = P.y.size();
  auto values = std::make_shared<std::vector<double>>(n, kInf);
  auto& h = *values;
  h[P.ic] = 0.0;
  auto step = [&](std::size_t from, std::size_t to, double log_decay) {
    if (!std::isfinite(h[from])) return;
    try {
      const double carried = std::exp(-log_decay) * h[from];
      const double fresh = P.panelled(P.y[to], P.y[from], -1.0, &weight);
      const double v = carried + fresh;
      if (std::isfinite(v)) h[to] = v;
    } catch (const EvalError&) {
    } catch (const quad::QuadratureFailure&) {
    }
  };
  for (std::size_t j = P.ic; j + 1 < n; ++j) step(j, j + 1, P.dI[j]);
  for (std::size_t j = P.ic; j > 0; --j) step(j, j - 1, -P.dI[j - 1]);

  NestedTable t;
  t.profile_ = impl_;
  t.values_ = std::move(values);
  t.weight_ = weight;
  return t;
}

double ScaleProfile::NestedTable::operator()(double x) const {
  const Impl& P = *profile_;
  const std::size_t j = P.anchor_index(x);
  const double hj = Impl::finite_or_throw((*values_)[j], P.y[j]);
  if (x == P.y[j]) return hj;
  const double carried = std::exp(-P.local_integral(P.y[j], x)) * hj;
  const double v = carried + P.panelled(x, P.y[j], -1.0, &weight_);
  return Impl::finite_or_throw(v, x);
}

IntegrabilityVerdict test_function_limit(const CoefficientSet& cs, const ScaleProfile& profile,
                                         const std::optional<Expression>& b_squared, Endpoint e) {
  const auto& tol = profile.tolerances();
  const IntegrabilityVerdict& s_end = profile.s_at(e);
  if (s_end.status == Status::Indeterminate) return s_end;

  const double end = cs.endpoint(e);
  const double a = e == Endpoint::Ell ? end : cs.c;
  const double b = e == Endpoint::Ell ? cs.c : end;
  const quad::EndFlags flags{e == Endpoint::Ell, e == Endpoint::R};

  if (s_end.status == Status::Finite) {
    auto g = [&](double y) {
      const double sg = cs.sigma(y);
      const double b2 = b_squared ? (*b_squared)(y) : 1.0;
      const double v = 2.0 * b2 * profile.tail_ratio(e, y) / (sg * sg);
      if (!std::isfinite(v)) throw EvalError(EvalErrorKind::Overflow, y, "test function integrand");
      return v;
    };
    return guarded_improper(g, a, b, flags, tol);
  }

  // s(e) infinite: v(x) = int_c^x s'(z) int_c^z 2 b^2 / (s' sigma^2) dy dz.
  const Expression two = Expression::constant(2.0);
  const Expression weight = b_squared ? two * *b_squared / (cs.sigma * cs.sigma) : two / (cs.sigma * cs.sigma);
  const auto table = profile.nested(weight);
  return guarded_improper([&](double z) { return table(z); }, a, b, flags, tol);
}

Tri is_finite(const IntegrabilityVerdict& v) {
  switch (v.status) {
    case Status::Finite: return Tri::True;
    case Status::Infinite: return Tri::False;
    case Status::Indeterminate: return Tri::Indeterminate;
  }
  return Tri::Indeterminate;
}

ExplosionReport feller_test(const ScaleProfile&, const IntegrabilityVerdict& v_ell, const IntegrabilityVerdict& v_r) {
  ExplosionReport rep;
  rep.ell_attainable = is_finite(v_ell);
  rep.r_attainable = is_finite(v_r);
  if (v_ell.status == Status::Indeterminate || v_r.status == Status::Indeterminate) {
    rep.status = Explosion::Indeterminate;
  } else if (v_ell.status == Status::Infinite && v_r.status == Status::Infinite) {
    rep.status = Explosion::NoExplosionAs;
  } else {
    rep.status = Explosion::ExplodesWithPositiveProb;
  }
  return rep;
}

Certainty certain_explosion(const ScaleProfile& profile, const IntegrabilityVerdict& vx_ell,
                            const IntegrabilityVerdict& vx_r) {
  if (vx_ell.status == Status::Indeterminate || vx_r.status == Status::Indeterminate) {
    return Certainty::Indeterminate;
  }
  const Tri r_fin = is_finite(vx_r), l_fin = is_finite(vx_ell);
  const Tri s_ell_inf = tri_not(is_finite(profile.s_at_ell()));
  const Tri s_r_inf = tri_not(is_finite(profile.s_at_r()));
  const Tri a = tri_and(r_fin, l_fin);
  const Tri b = tri_and(r_fin, s_ell_inf);
  const Tri c = tri_and(l_fin, s_r_inf);
  switch (tri_or(tri_or(a, b), c)) {
    case Tri::True: return Certainty::Certain;
    case Tri::False: return Certainty::NotCertain;
    case Tri::Indeterminate: return Certainty::Indeterminate;
  }
  return Certainty::Indeterminate;
}

}  // namespace zeroone::feller
