#pragma once

// Complex-time geometry of the adiabatic problem: turning points, Stokes
// lines Re int_{tau_c}^{tau} E(s) ds = 0, their real-axis crossings, the
// imaginary actions D_k and the leading-order connection formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/quadrature.hpp"

namespace tdres {

enum class HalfPlane { upper, lower };

struct TurningPoint {
  cplx location;
  int index = 0;
  HalfPlane half_plane = HalfPlane::upper;
};

/// E(tau) = sqrt(P(tau)) for a polynomial P that is positive on the real axis.
struct EnergySurface {
  std::function<cplx(cplx)> squared;
  std::function<cplx(cplx)> squared_derivative;
  /// All zeros of P, upper half-plane first; within each half-plane k runs
  /// in order of descending real part.
  std::vector<TurningPoint> turning_points;
  /// Characteristic distance of the turning points from the origin.
  double scale = 1.0;

  double real_energy(double tau) const { return std::sqrt(squared(cplx{tau, 0.0}).real()); }
};

inline std::vector<TurningPoint> label_turning_points(const std::vector<cplx>& roots) {
  std::vector<cplx> upper;
  std::vector<cplx> lower;
  for (const cplx& r : roots) (r.imag() > 0.0 ? upper : lower).push_back(r);
  const auto by_real_desc = [](const cplx& a, const cplx& b) { return a.real() > b.real(); };
  std::sort(upper.begin(), upper.end(), by_real_desc);
  std::sort(lower.begin(), lower.end(), by_real_desc);
  std::vector<TurningPoint> out;
  for (std::size_t k = 0; k < upper.size(); ++k) out.push_back({upper[k], static_cast<int>(k), HalfPlane::upper});
  for (std::size_t k = 0; k < lower.size(); ++k) out.push_back({lower[k], static_cast<int>(k), HalfPlane::lower});
  return out;
}

/// The 2n zeros of tau^{2n} + delta^2:
/// exp(+-i (pi/2n + k pi/n)) delta^{1/n}, k = 0..n-1.
inline std::vector<TurningPoint> turning_points(const ModelParams& p) {
  p.validate();
  const double r = std::pow(p.delta_tilde, 1.0 / p.n);
  std::vector<cplx> roots;
  for (int k = 0; k < p.n; ++k) {
    const double ang = std::numbers::pi / (2.0 * p.n) + k * std::numbers::pi / p.n;
    roots.push_back(std::polar(r, ang));
    roots.push_back(std::polar(r, -ang));
  }
  return label_turning_points(roots);
}

inline EnergySurface sweep_surface(const ModelParams& p) {
  p.validate();
  EnergySurface s;
  const int n = p.n;
  const double d2 = p.delta_tilde * p.delta_tilde;
  s.squared = [n, d2](cplx t) {
    const cplx tn = ipow(t, n);
    return tn * tn + d2;
  };
  s.squared_derivative = [n](cplx t) { return 2.0 * n * ipow(t, 2 * n - 1); };
  s.turning_points = turning_points(p);
  s.scale = std::pow(p.delta_tilde, 1.0 / n);
  return s;
}

struct Box {
  double re_min = -4.0;
  double re_max = 4.0;
  double im_min = -4.0;
  double im_max = 4.0;

  bool contains(cplx z) const {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
};

enum class LineEnd { real_axis, box, turning_point };

struct StokesLine {
  TurningPoint origin;
  int branch = 0;
  double initial_angle = 0.0;
  std::vector<cplx> points;
  std::optional<double> crossing;
  LineEnd end = LineEnd::box;
  /// int_{tau_c}^{last point} E(s) ds accumulated along the polyline with the
  /// branch of E continued from the turning point.
  cplx accumulated_integral{};
};

struct TraceOptions {
  double seed_factor = 1e-3;
  double max_step_factor = 0.02;
  double curvature_factor = 0.05;
  double crossing_tol = 1e-8;
  std::size_t max_steps = 500000;
};

namespace detail {

inline cplx follow_sqrt(cplx squared, cplx reference) {
  const cplx r = std::sqrt(squared);
  return std::abs(r - reference) <= std::abs(r + reference) ? r : -r;
}

/// int_a^b E ds on a short straight segment; the branch at every node is the
/// one closest to `e_start`.
inline cplx segment_integral(const EnergySurface& s, cplx a, cplx b, cplx e_start) {
  const cplx d = b - a;
  const auto f = [&](double t) { return follow_sqrt(s.squared(a + d * t), e_start) * d; };
  return gauss20(f, 0.0, 1.0);
}

/// Unit vector along which E dtau is purely imaginary, oriented to continue `previous`.
inline cplx stokes_direction(cplx e, cplx previous) {
  const double m = std::abs(e);
  cplx u = kI * std::conj(e) / m;
  if ((u * std::conj(previous)).real() < 0.0) u = -u;
  return u;
}

}  // namespace detail

/// The three directions (angles) along which Stokes lines leave a simple
/// turning point, from E ~ c (tau - tau_c)^{1/2} with c^2 = P'(tau_c).
inline std::array<double, 3> stokes_directions(const EnergySurface& s, const TurningPoint& tp) {
  const cplx c = std::sqrt(s.squared_derivative(tp.location));
  std::array<double, 3> out{};
  for (int m = 0; m < 3; ++m) {
    double a = (2.0 / 3.0) * (0.5 * std::numbers::pi + m * std::numbers::pi - std::arg(c));
    a = std::remainder(a, 2.0 * std::numbers::pi);
    out[static_cast<std::size_t>(m)] = a;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Index of the emanating direction that points most nearly toward the real axis.
inline int branch_toward_real_axis(const EnergySurface& s, const TurningPoint& tp) {
  const auto dirs = stokes_directions(s, tp);
  const double target = tp.half_plane == HalfPlane::upper ? -0.5 * std::numbers::pi : 0.5 * std::numbers::pi;
  int best = 0;
  double best_d = 1e300;
  for (int m = 0; m < 3; ++m) {
    const double d = std::abs(std::remainder(dirs[static_cast<std::size_t>(m)] - target, 2.0 * std::numbers::pi));
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

/// Traces the Stokes line leaving `origin` along direction `branch` (index
/// into stokes_directions). Predictor: midpoint step along the direction
/// field; corrector: Newton steps normal to the line onto Re int E = 0.
/// Stops at the first real-axis crossing, at the box boundary, or close to
/// another turning point.
inline StokesLine trace_stokes_line(const EnergySurface& s, const TurningPoint& origin, int branch,
                                    const Box& box, const TraceOptions& opt = {}) {
  if (branch < 0 || branch > 2) throw InvalidArgument("branch", "must be 0, 1 or 2");
  if (std::abs(s.squared(origin.location)) > 1e-8 * std::max(1.0, std::pow(s.scale, 2)))
    throw InvalidArgument("origin", "not a turning point of the energy surface");

  StokesLine line;
  line.origin = origin;
  line.branch = branch;
  const double phi = stokes_directions(s, origin)[static_cast<std::size_t>(branch)];
  line.initial_angle = phi;

  const cplx tc = origin.location;
  const cplx c = std::sqrt(s.squared_derivative(tc));
  const double rho = opt.seed_factor * s.scale;
  const cplx unit = std::polar(1.0, phi);

  // Seed: int_{tc}^{tc + rho e^{i phi}} E ds with s = tc + rho e^{i phi} w^2.
  const cplx local = c * std::sqrt(rho) * std::polar(1.0, 0.5 * phi);
  const auto seed_integrand = [&](double w) {
    const cplx e = detail::follow_sqrt(s.squared(tc + rho * unit * w * w), local * w);
    return e * 2.0 * rho * unit * w;
  };
  cplx F = gauss20(seed_integrand, 0.0, 1.0);
  cplx tau = tc + rho * unit;
  cplx e = detail::follow_sqrt(s.squared(tau), local);
  cplx dir = unit;

  line.points.push_back(tc);

  const double sign0 = tc.imag() > 0.0 ? 1.0 : -1.0;
  const double near_tp = 2.0 * rho;
  const double h_max = opt.max_step_factor * s.scale;
  const double h_min = 0.25 * rho;

  const auto correct = [&](cplx& t, cplx& et, cplx& Ft) {
    for (int it = 0; it < 4; ++it) {
      const double m = std::abs(et);
      if (std::abs(Ft.real()) <= 1e-15 * std::max(1.0, std::abs(Ft)) || m == 0.0) break;
      const cplx t2 = t - (Ft.real() / m) * std::conj(et) / m;
      Ft += detail::segment_integral(s, t, t2, et);
      et = detail::follow_sqrt(s.squared(t2), et);
      t = t2;
    }
  };
  correct(tau, e, F);
  line.points.push_back(tau);

  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    double dist = 1e300;
    for (const auto& tp : s.turning_points) dist = std::min(dist, std::abs(tau - tp.location));
    const double h = std::clamp(opt.curvature_factor * dist, h_min, h_max);

    if (std::abs(e) < 1e-12)
      throw NumericalError("stokes", "trace_stokes_line", "branch ambiguity: |E| below 1e-12 away from turning points");
    const cplx d1 = detail::stokes_direction(e, dir);
    const cplx tm = tau + 0.5 * h * d1;
    const cplx em = detail::follow_sqrt(s.squared(tm), e);
    const cplx d2 = detail::stokes_direction(em, d1);
    cplx tn = tau + h * d2;
    cplx Fn = F + detail::segment_integral(s, tau, tn, e);
    cplx en = detail::follow_sqrt(s.squared(tn), e);
    correct(tn, en, Fn);

    if (tn.imag() * sign0 <= 0.0) {
      // Real-axis crossing: intersect the chord with Im = 0, then Newton on
      // the real line where d/dx Re F = Re E(x) != 0.
      const double frac = tau.imag() / (tau.imag() - tn.imag());
      double x = tau.real() + frac * (tn.real() - tau.real());
      cplx Fx = F + detail::segment_integral(s, tau, cplx{x, 0.0}, e);
      cplx ex = detail::follow_sqrt(s.squared(cplx{x, 0.0}), e);
      for (int it = 0; it < 50; ++it) {
        const double dx = -Fx.real() / ex.real();
        const double x2 = x + dx;
        Fx += detail::segment_integral(s, cplx{x, 0.0}, cplx{x2, 0.0}, ex);
        ex = detail::follow_sqrt(s.squared(cplx{x2, 0.0}), ex);
        x = x2;
        if (std::abs(dx) < 1e-3 * opt.crossing_tol) break;
      }
      if (std::abs(Fx.real()) > 1e-9)
        throw NumericalError("stokes", "trace_stokes_line", "crossing refinement did not converge");
      line.points.push_back(cplx{x, 0.0});
      line.crossing = x;
      line.end = LineEnd::real_axis;
      line.accumulated_integral = Fx;
      return line;
    }
    if (!box.contains(tn)) {
      line.points.push_back(tn);
      line.end = LineEnd::box;
      line.accumulated_integral = Fn;
      return line;
    }
    bool hit = false;
    for (const auto& tp : s.turning_points)
      if (std::abs(tp.location - tc) > 1e-12 && std::abs(tn - tp.location) < near_tp) hit = true;
    line.points.push_back(tn);
    tau = tn;
    e = en;
    F = Fn;
    dir = d2;
    if (hit) {
      line.end = LineEnd::turning_point;
      line.accumulated_integral = F;
      return line;
    }
  }
  throw NumericalError("stokes", "trace_stokes_line", "step budget exhausted without termination");
}

/// D = Im int_{tau_r}^{tau_c} E(s) ds with E > 0 at tau_r, along a straight
/// segment (bent once if it passes within 0.1 |tau_c| of another turning point).
inline double imaginary_action(const EnergySurface& s, const TurningPoint& tp, double tau_r) {
  const cplx tc = tp.location;
  const cplx tr{tau_r, 0.0};

  const auto distance_to_segment = [](cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double t = std::clamp(((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
    return std::abs(p - (a + t * d));
  };
  const auto closest_other = [&](cplx a, cplx b) {
    double best = 1e300;
    cplx where{};
    for (const auto& o : s.turning_points) {
      if (std::abs(o.location - tc) < 1e-12) continue;
      const double d = distance_to_segment(o.location, a, b);
      if (d < best) {
        best = d;
        where = o.location;
      }
    }
    return std::pair{best, where};
  };

  // Regular part tr -> v with branch continuity, then v -> tc with the
  // square-root substitution s = tc + (v - tc) w^2.
  const auto integrate_path = [&](cplx v) {
    cplx e = std::sqrt(s.squared(tr));
    if (e.real() < 0.0) e = -e;
    cplx total{};
    if (std::abs(v - tr) > 0.0) {
      constexpr int panels = 128;
      for (int j = 0; j < panels; ++j) {
        const cplx a = tr + (v - tr) * (static_cast<double>(j) / panels);
        const cplx b = tr + (v - tr) * (static_cast<double>(j + 1) / panels);
        total += detail::segment_integral(s, a, b, e);
        e = detail::follow_sqrt(s.squared(b), e);
      }
    }
    // w runs from 1 (at v) down to 0 (at tc); E ~ w near tc, so E(w1) w / w1
    // is a valid branch reference inside each panel.
    constexpr int panels = 256;
    cplx ew = e;
    for (int j = panels; j > 0; --j) {
      const double w1 = static_cast<double>(j) / panels;
      const double w0 = static_cast<double>(j - 1) / panels;
      const cplx ref = ew;
      const auto f = [&](double w) {
        const cplx ee = detail::follow_sqrt(s.squared(tc + (v - tc) * w * w), ref * (w / w1));
        return ee * 2.0 * w * (v - tc);
      };
      total -= gauss20(f, w0, w1);
      if (j > 1) ew = detail::follow_sqrt(s.squared(tc + (v - tc) * w0 * w0), ref * (w0 / w1));
    }
    return total;
  };

  cplx v = tr;
  auto [d, where] = closest_other(tr, tc);
  const double radius = 0.1 * std::abs(tc);
  if (d < radius) {
    const cplx mid = 0.5 * (tr + tc);
    const cplx normal = kI * (tc - tr) / std::abs(tc - tr);
    const double side = ((mid - where) * std::conj(normal)).real() >= 0.0 ? 1.0 : -1.0;
    v = mid + side * 2.0 * radius * normal;
    const double d1 = closest_other(tr, v).first;
    const double d2 = closest_other(v, tc).first;
    if (std::min(d1, d2) < 1e-3)
      throw NumericalError("stokes", "imaginary_action", "integration path passes through another turning point");
    // integrate_path handles tr -> v regular, v -> tc singular end
  }
  return integrate_path(v).imag();
}

struct StokesGeometry {
  std::vector<TurningPoint> turning_points;
  std::vector<StokesLine> lines;
  /// Real-axis crossing times inside the window, ascending.
  std::vector<double> crossings;
  /// Turning-point index k (upper half-plane) owning each crossing.
  std::vector<int> indices;
  /// D_k for each crossing.
  std::vector<double> actions;
  /// Turning point location owning each crossing.
  std::vector<cplx> origins;
  double tau0 = 0.0;
  double tauf = 0.0;
};

inline Box default_box(const EnergySurface& s, double tau0, double tauf) {
  const double r = 4.0 * s.scale;
  return {std::min(-r, tau0), std::max(r, tauf), -r, r};
}

/// Traces all three Stokes lines of every turning point and collects, for
/// each upper-half-plane turning point, the first real-axis crossing that
/// falls inside [tau0, tauf].
inline StokesGeometry stokes_geometry(const EnergySurface& s, double tau0, double tauf,
                                      std::optional<Box> box = std::nullopt, const TraceOptions& opt = {}) {
  const Box b = box.value_or(default_box(s, tau0, tauf));
  StokesGeometry g;
  g.turning_points = s.turning_points;
  g.tau0 = tau0;
  g.tauf = tauf;
  struct Entry {
    double tau;
    int k;
    cplx tc;
  };
  std::vector<Entry> entries;
  for (const auto& tp : s.turning_points) {
    bool taken = false;
    for (int br = 0; br < 3; ++br) {
      StokesLine line = trace_stokes_line(s, tp, br, b, opt);
      if (tp.half_plane == HalfPlane::upper && !taken && line.crossing && *line.crossing >= tau0 &&
          *line.crossing <= tauf) {
        entries.push_back({*line.crossing, tp.index, tp.location});
        taken = true;
      }
      g.lines.push_back(std::move(line));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& c) { return a.tau < c.tau; });
  for (const auto& en : entries) {
    g.crossings.push_back(en.tau);
    g.indices.push_back(en.k);
    g.origins.push_back(en.tc);
    g.actions.push_back(imaginary_action(s, TurningPoint{en.tc, en.k, HalfPlane::upper}, en.tau));
  }
  return g;
}

inline StokesGeometry stokes_geometry(const ModelParams& p) {
  return stokes_geometry(sweep_surface(p), p.tau0, p.tauf);
}

/// Crossings of an already traced geometry restricted to [tau0, tauf].
inline std::vector<double> real_axis_crossings(const StokesGeometry& g, double tau0, double tauf) {
  std::vector<double> out;
  for (double t : g.crossings)
    if (t >= tau0 && t <= tauf) out.push_back(t);
  return out;
}

/// Position of crossing k (turning-point index) in the geometry, or -1.
inline int crossing_slot(const StokesGeometry& g, int k) {
  for (std::size_t i = 0; i < g.indices.size(); ++i)
    if (g.indices[i] == k) return static_cast<int>(i);
  return -1;
}

inline double imaginary_action(int k, const ModelParams& p, const StokesGeometry& g) {
  const int slot = crossing_slot(g, k);
  if (slot < 0) throw InvalidArgument("k", "no real-axis crossing for turning point " + std::to_string(k));
  return g.actions[static_cast<std::size_t>(slot)];
}

/// Adiabatic-impulse amplitude
/// sum_k (-1)^k e^{i int_{tau0}^{tau_r} E} e^{-i int_{tau_r}^{tauf} E} e^{-2 D_k}.
inline cplx wkb_transition_amplitude(const std::function<double(double)>& energy, const StokesGeometry& g,
                                     double tau0, double tauf) {
  cplx sum{};
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const double tr = g.crossings[i];
    const double before = integrate(energy, tau0, tr);
    const double after = integrate(energy, tr, tauf);
    const double sign = g.indices[i] % 2 == 0 ? 1.0 : -1.0;
    sum += sign * std::polar(std::exp(-2.0 * g.actions[i]), before - after);
  }
  return sum;
}

inline cplx wkb_transition_amplitude(const ModelParams& p, const StokesGeometry& g) {
  return wkb_transition_amplitude([&p](double t) { return free_energy(t, p); }, g, p.tau0, p.tauf);
}

// ---------------------------------------------------------------------------
// Connection formulas

using Mat2 = std::array<std::array<cplx, 2>, 2>;

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

inline cplx det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

enum class Dominance { minus, plus };

/// Turning-point value of i cot(theta/2) (minus-dominant) or i tan(theta/2)
/// (plus-dominant). Both have unit modulus at a simple zero of E; the sign is
/// fixed so that composing over the upper turning points yields the
/// alternating sum sum_k (-1)^k e^{...}.
inline cplx connection_coefficient(const TurningPoint& tp, Dominance dominance) {
  const double parity = tp.index % 2 == 0 ? 1.0 : -1.0;
  return dominance == Dominance::minus ? cplx{parity, 0.0} : cplx{-parity, 0.0};
}

/// Unipotent connection matrix acting on (psi_{A,+}, psi_{A,-}) when the
/// Stokes line of `tp` is crossed counterclockwise. `phase_integral` is
/// int_{tau0}^{tau_c} (E_- - E_+) ds; correction terms g_+- are dropped.
inline Mat2 connection_matrix(const TurningPoint& tp, Dominance dominance, cplx phase_integral) {
  const cplx coef = connection_coefficient(tp, dominance);
  if (dominance == Dominance::minus) return Mat2{{{1.0, 0.0}, {coef * std::exp(-kI * phase_integral), 1.0}}};
  return Mat2{{{1.0, coef * std::exp(kI * phase_integral)}, {0.0, 1.0}}};
}

/// Product of the minus-dominant connection matrices of every crossing in the
/// geometry, in order of crossing time. int_{tau0}^{tau_c} E is split into
/// the real part up to tau_r plus i D_k.
inline Mat2 compose_connections(const std::function<double(double)>& energy, const StokesGeometry& g,
                                double tau0) {
  Mat2 m{{{1.0, 0.0}, {0.0, 1.0}}};
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const cplx to_tc = integrate(energy, tau0, g.crossings[i]) + kI * g.actions[i];
    const TurningPoint tp{g.origins[i], g.indices[i], HalfPlane::upper};
    m = connection_matrix(tp, Dominance::minus, -2.0 * to_tc) * m;
  }
  return m;
}

/// <E_+(tauf)| U |E_-(tau0)> from the composed connection matrices: the
/// psi_{A,+} coefficient times its adiabatic phase e^{-i int_{tau0}^{tauf} E}.
inline cplx amplitude_from_connections(const std::function<double(double)>& energy, const StokesGeometry& g,
                                       double tau0, double tauf) {
  const Mat2 m = compose_connections(energy, g, tau0);
  return m[1][0] * std::exp(-kI * integrate(energy, tau0, tauf));
}

}  // namespace tdres
