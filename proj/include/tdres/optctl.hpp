#pragma once

// Gradient-based optimal control for H(tau) = (a + u(tau) b) . sigma with a
// box-bounded, grid-sampled control, plus least-squares fitting of the
// optimized control to the time-dependent-resonance ansatz.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/quadrature.hpp"

namespace tdres {

/// Control values on a uniform grid of M+1 nodes over [tau0, tauf].
/// Node j holds the control on [tau_j - d/2, tau_j + d/2] clipped to the window.
struct ControlGrid {
  double tau0 = 0.0;
  double tauf = 1.0;
  std::vector<double> values;
  double lower = -1.0;
  double upper = 1.0;

  std::size_t intervals() const { return values.empty() ? 0 : values.size() - 1; }
  double spacing() const { return (tauf - tau0) / static_cast<double>(intervals()); }
  double time(std::size_t j) const {
    return j == intervals() ? tauf : tau0 + spacing() * static_cast<double>(j);
  }

  void validate() const {
    if (values.size() < 2) throw InvalidArgument("intervals", "grid needs at least one interval");
    if (!(tau0 < tauf)) throw InvalidArgument("tauf", "tau0 must be smaller than tauf");
    if (!(lower < upper)) throw InvalidArgument("bounds", "lower bound must be below upper bound");
    for (double v : values)
      if (!(v >= lower && v <= upper)) throw InvalidArgument("values", "control outside its bounds");
  }

  static ControlGrid sample(const std::function<double(double)>& f, double tau0, double tauf,
                            std::size_t intervals, double lower, double upper) {
    ControlGrid g{tau0, tauf, std::vector<double>(intervals + 1), lower, upper};
    for (std::size_t j = 0; j <= intervals; ++j) g.values[j] = std::clamp(f(g.time(j)), lower, upper);
    g.validate();
    return g;
  }
};

/// Minimize <x(tauf)| cost . sigma |x(tauf)> subject to
/// i dx/dtau = (drift + u control) . sigma x, x(tau0) = initial.
struct OptProblem {
  Bloch drift;
  Bloch control;
  Bloch cost;
  Spinor initial{};
  ControlGrid grid;
};

/// The sweep problem: drift delta sx, control sz, cost u+ sz + delta sx, start
/// in the ground state of u- sz + delta sx, initial guess tau^n clipped.
inline OptProblem sweep_problem(const ModelParams& p, std::size_t intervals, std::optional<double> u_plus = {},
                                std::optional<double> u_minus = {}) {
  p.validate();
  const double up = u_plus.value_or(ipow(p.tauf, p.n));
  const double um = u_minus.value_or(-ipow(p.tauf, p.n));
  OptProblem prob;
  prob.drift = {p.delta_tilde, 0.0, 0.0};
  prob.control = {0.0, 0.0, 1.0};
  prob.cost = {p.delta_tilde, 0.0, up};
  prob.initial = eigenframe(um, p.delta_tilde).ground;
  const int n = p.n;
  prob.grid = ControlGrid::sample([n](double t) { return ipow(t, n); }, p.tau0, p.tauf, intervals, um, up);
  return prob;
}

struct ForwardBackward {
  /// States after each half-step, 2M+1 entries starting at tau0.
  std::vector<Spinor> states;
  /// Costates on the same half-step grid, k(tauf) = H_C x(tauf).
  std::vector<Spinor> costates;
  double objective = 0.0;

  /// State at grid node j.
  const Spinor& state_at_node(std::size_t j) const { return states[2 * j]; }
};

namespace detail {

inline Spinor expm_apply(const Bloch& b, double h, const Spinor& psi, bool adjoint = false) {
  const double e = b.norm();
  if (e == 0.0) return psi;
  const double s = adjoint ? -std::sin(h * e) : std::sin(h * e);
  const double c = std::cos(h * e);
  const Spinor np = apply_pauli((1.0 / e) * b, psi);
  return {c * psi[0] - kI * s * np[0], c * psi[1] - kI * s * np[1]};
}

/// Node whose control acts on half-step m: half 2j uses u_j, half 2j+1 uses u_{j+1}.
inline std::size_t half_step_node(std::size_t m) { return (m + 1) / 2; }

inline Bloch half_step_field(const OptProblem& p, const std::vector<double>& u, std::size_t m) {
  return p.drift + u[half_step_node(m)] * p.control;
}

}  // namespace detail

inline ForwardBackward forward_backward(const OptProblem& p, const std::vector<double>& u) {
  const std::size_t halves = 2 * (u.size() - 1);
  const double h = 0.5 * p.grid.spacing();
  ForwardBackward fb;
  fb.states.resize(halves + 1);
  fb.costates.resize(halves + 1);
  fb.states[0] = p.initial;
  for (std::size_t m = 0; m < halves; ++m)
    fb.states[m + 1] = detail::expm_apply(detail::half_step_field(p, u, m), h, fb.states[m]);
  const Spinor& xf = fb.states.back();
  const Spinor hx = apply_pauli(p.cost, xf);
  fb.objective = inner(xf, hx).real();
  if (!std::isfinite(fb.objective)) throw NumericalError("optctl", "forward_backward", "non-finite objective");
  fb.costates[halves] = hx;
  for (std::size_t m = halves; m-- > 0;)
    fb.costates[m] = detail::expm_apply(detail::half_step_field(p, u, m), h, fb.costates[m + 1], true);
  return fb;
}

inline ForwardBackward forward_backward(const OptProblem& p) { return forward_backward(p, p.grid.values); }

inline double objective(const OptProblem& p, const std::vector<double>& u) {
  const std::size_t halves = 2 * (u.size() - 1);
  const double h = 0.5 * p.grid.spacing();
  Spinor x = p.initial;
  for (std::size_t m = 0; m < halves; ++m) x = detail::expm_apply(detail::half_step_field(p, u, m), h, x);
  return inner(x, apply_pauli(p.cost, x)).real();
}

/// Exact derivative of the discrete objective with respect to every node value.
/// In the small-step limit g_j = (-i <k|b.sigma|x> + c.c.) * d.
inline std::vector<double> gradient(const OptProblem& p, const std::vector<double>& u, const ForwardBackward& fb) {
  const std::size_t halves = 2 * (u.size() - 1);
  const double h = 0.5 * p.grid.spacing();
  std::vector<double> g(u.size(), 0.0);
  for (std::size_t m = 0; m < halves; ++m) {
    const Bloch b = detail::half_step_field(p, u, m);
    const double e = b.norm();
    const Spinor& x = fb.states[m];
    const Spinor& k = fb.costates[m + 1];
    // dU = -i [ h (n.B) (n.sigma) U + sin(h e)/e (B - (n.B) n) . sigma ]
    cplx val;
    if (e == 0.0) {
      val = -kI * h * inner(k, apply_pauli(p.control, x));
    } else {
      const Bloch nh = (1.0 / e) * b;
      const double nb = dot(nh, p.control);
      const Spinor ux = fb.states[m + 1];
      const cplx t1 = h * nb * inner(k, apply_pauli(nh, ux));
      const Bloch perp = p.control + (-nb) * nh;
      const cplx t2 = std::sin(h * e) / e * inner(k, apply_pauli(perp, x));
      val = -kI * (t1 + t2);
    }
    g[detail::half_step_node(m)] += 2.0 * val.real();
  }
  return g;
}

inline std::vector<double> gradient(const OptProblem& p) {
  return gradient(p, p.grid.values, forward_backward(p));
}

struct OptimizerConfig {
  std::size_t max_iterations = 10000;
  double gradient_tolerance = 1e-6;
  double backtracking = 0.5;
  double armijo = 1e-4;
  /// First trial step; zero picks one that moves the largest node by 1% of the bound range.
  double initial_step = 0.0;
  double min_step = 1e-18;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

enum class StopReason { converged, stalled, iteration_cap };

struct OptimizeResult {
  ControlGrid grid;
  std::vector<IterationRecord> log;
  StopReason reason = StopReason::iteration_cap;
  double objective = 0.0;
  double grad_norm = 0.0;
};

/// Largest gradient component that is free to move, ignoring components that
/// push an active node further into its bound.
inline double projected_gradient_norm(const std::vector<double>& g, const ControlGrid& grid,
                                      const std::vector<double>& u) {
  double m = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (u[j] <= grid.lower && g[j] > 0.0) continue;
    if (u[j] >= grid.upper && g[j] < 0.0) continue;
    m = std::max(m, std::abs(g[j]));
  }
  return m;
}

/// Projected gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking along the projection arc. Accepted steps never raise J.
inline OptimizeResult optimize(const OptProblem& problem, const OptimizerConfig& cfg = {}) {
  problem.grid.validate();
  const ControlGrid& grid = problem.grid;
  std::vector<double> u = grid.values;
  ForwardBackward fb = forward_backward(problem, u);
  std::vector<double> g = gradient(problem, u, fb);
  double j = fb.objective;

  OptimizeResult res;
  double pg = projected_gradient_norm(g, grid, u);
  double eta = cfg.initial_step;
  if (eta <= 0.0) eta = pg > 0.0 ? 0.01 * (grid.upper - grid.lower) / pg : 1.0;
  res.log.push_back({0, j, pg, 0.0});

  std::vector<double> trial(u.size());
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    if (pg < cfg.gradient_tolerance) {
      res.reason = StopReason::converged;
      break;
    }
    double step = eta;
    bool accepted = false;
    double jt = j;
    for (;;) {
      double decrease = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        trial[i] = std::clamp(u[i] - step * g[i], grid.lower, grid.upper);
        decrease += g[i] * (trial[i] - u[i]);
      }
      jt = objective(problem, trial);
      if (decrease < 0.0 && jt <= j + cfg.armijo * decrease) {
        accepted = true;
        break;
      }
      step *= cfg.backtracking;
      if (step < cfg.min_step) break;
    }
    if (!accepted) {
      res.reason = StopReason::stalled;
      break;
    }
    ForwardBackward fbt = forward_backward(problem, trial);
    std::vector<double> gt = gradient(problem, trial, fbt);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double s = trial[i] - u[i];
      ss += s * s;
      sy += s * (gt[i] - g[i]);
    }
    eta = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 2.0 * step;
    u.swap(trial);
    g.swap(gt);
    j = fbt.objective;
    pg = projected_gradient_norm(g, grid, u);
    res.log.push_back({it, j, pg, step});
  }
  if (res.reason == StopReason::iteration_cap && pg < cfg.gradient_tolerance) res.reason = StopReason::converged;
  res.grid = grid;
  res.grid.values = u;
  res.objective = j;
  res.grad_norm = pg;
  return res;
}

// ---------------------------------------------------------------------------
// Fitting

/// Resonance basis for fitting: phase phi(tau, tau_r) = 2 int_{tau_r}^tau E,
/// envelope 1/E(tau).
struct ResonanceBasis {
  std::function<double(double)> energy;
  std::shared_ptr<const PhaseTable> phase;  // antiderivative of E
  std::vector<double> crossings;
  /// When true, each crossing gets a free phase xi_k.
  bool free_phase = false;
};

struct FitResult {
  std::size_t crossing_index = 0;
  double crossing = 0.0;
  double alpha = 0.0;
  double xi = 0.0;
  /// alpha e^{-i xi}
  cplx complex_amplitude{};
};

struct FitSummary {
  std::vector<FitResult> components;
  /// RMS of (u_opt - u0 - u_fit) over the fit window.
  double residual = 0.0;
  /// RMS of (u_opt - u0) over the fit window.
  double oscillation_rms = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// Numerical rank of the normal equations.
  std::size_t rank = 0;
};

/// Evaluate sum_k -alpha_k sin(phi_k + xi_k) / E.
inline double resonance_sum(const ResonanceBasis& basis, const std::vector<FitResult>& comps, double tau) {
  const double e = basis.energy(tau);
  const double a = basis.phase->antiderivative(tau);
  double v = 0.0;
  for (const auto& c : comps) {
    const double ph = 2.0 * (a - basis.phase->antiderivative(c.crossing));
    v -= c.alpha * std::sin(ph + c.xi) / e;
  }
  return v;
}

/// Least-squares fit of u_opt - u0 to the resonance ansatz over the window with
/// edge_fraction of its length removed (half at each end).
inline FitSummary fit_resonance(const ControlGrid& u_opt, const std::function<double(double)>& u0,
                                const ResonanceBasis& basis, double edge_fraction = 0.05) {
  const std::size_t nk = basis.crossings.size();
  if (nk == 0) throw InvalidArgument("crossings", "no crossings to fit");
  const std::size_t cols = basis.free_phase ? 2 * nk : nk;
  for (std::size_t i = 0; i < nk; ++i)
    for (std::size_t k = i + 1; k < nk; ++k)
      if (std::abs(basis.crossings[i] - basis.crossings[k]) < 1e-9)
        throw NumericalError("optctl", "fit_resonance", "coincident crossings make the fit rank deficient");
  const double len = u_opt.tauf - u_opt.tau0;
  FitSummary out;
  out.window_lo = u_opt.tau0 + 0.5 * edge_fraction * len;
  out.window_hi = u_opt.tauf - 0.5 * edge_fraction * len;

  std::vector<double> refs;
  for (double tr : basis.crossings) refs.push_back(basis.phase->antiderivative(tr));

  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j <= u_opt.intervals(); ++j) {
    const double t = u_opt.time(j);
    if (t >= out.window_lo && t <= out.window_hi) rows.push_back(j);
  }
  Eigen::MatrixXd a(rows.size(), cols);
  Eigen::VectorXd y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double t = u_opt.time(rows[r]);
    const double e = basis.energy(t);
    const double phi = basis.phase->antiderivative(t);
    y(r) = u_opt.values[rows[r]] - u0(t);
    for (std::size_t k = 0; k < nk; ++k) {
      const double ph = 2.0 * (phi - refs[k]);
      a(r, k) = -std::sin(ph) / e;
      if (basis.free_phase) a(r, nk + k) = -std::cos(ph) / e;
    }
  }
  // All components share the envelope 1/E and the phase 2 int E, so they span
  // at most the two functions sin(phi)/E and cos(phi)/E. With more unknowns
  // than that the minimum-norm solution is returned and `rank` reports it.
  const Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ata);
  cod.setThreshold(1e-10);
  out.rank = static_cast<std::size_t>(cod.rank());
  const Eigen::VectorXd coef = cod.solve(a.transpose() * y);
  const Eigen::VectorXd resid = y - a * coef;
  out.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(rows.size()));
  out.oscillation_rms = std::sqrt(y.squaredNorm() / static_cast<double>(rows.size()));
  for (std::size_t k = 0; k < nk; ++k) {
    FitResult f;
    f.crossing_index = k;
    f.crossing = basis.crossings[k];
    if (basis.free_phase) {
      // alpha sin(ph + xi) = (alpha cos xi) sin ph + (alpha sin xi) cos ph
      const double c = coef(static_cast<Eigen::Index>(k));
      const double s = coef(static_cast<Eigen::Index>(nk + k));
      f.complex_amplitude = {c, -s};
      f.alpha = std::hypot(c, s);
      f.xi = std::atan2(s, c);
    } else {
      f.alpha = coef(static_cast<Eigen::Index>(k));
      f.complex_amplitude = {f.alpha, 0.0};
    }
    out.components.push_back(f);
  }
  return out;
}

/// RMS of (u_opt - u0) - (reference - u0) over the trimmed window, relative to
/// the RMS of u_opt - u0 there.
inline double oscillation_shape_error(const ControlGrid& u_opt, const std::function<double(double)>& u0,
                                      const std::function<double(double)>& reference, double edge_fraction = 0.05) {
  const double len = u_opt.tauf - u_opt.tau0;
  const double lo = u_opt.tau0 + 0.5 * edge_fraction * len;
  const double hi = u_opt.tauf - 0.5 * edge_fraction * len;
  double diff = 0.0;
  double osc = 0.0;
  for (std::size_t j = 0; j <= u_opt.intervals(); ++j) {
    const double t = u_opt.time(j);
    if (t < lo || t > hi) continue;
    const double du = u_opt.values[j] - u0(t);
    const double dr = reference(t) - u0(t);
    diff += (du - dr) * (du - dr);
    osc += du * du;
  }
  if (osc == 0.0) throw NumericalError("optctl", "oscillation_shape_error", "optimized control has no oscillation");
  return std::sqrt(diff / osc);
}

/// Ground-state population |<E-(tau_j)|x(tau_j)>|^2 at every node, with the
/// eigenframe of the instantaneous controlled Hamiltonian.
inline std::vector<double> ground_state_probability_trace(const OptProblem& p, const std::vector<double>& u,
                                                          const ForwardBackward& fb) {
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Bloch b = p.drift + u[j] * p.control;
    if (b.y != 0.0) throw InvalidArgument("control", "eigenframe trace requires a real Hamiltonian");
    const EigenFrame f = eigenframe_zx(b.z, b.x);
    out[j] = std::norm(inner(f.ground, fb.state_at_node(j)));
  }
  return out;
}

}  // namespace tdres
