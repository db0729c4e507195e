#pragma once

// Two-level state representation, instantaneous eigenframes and a unitary
// fourth-order propagator for H(tau) = b(tau) . sigma.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tdres/errors.hpp"

namespace tdres {

using cplx = std::complex<double>;
using Spinor = std::array<cplx, 2>;

inline constexpr cplx kI{0.0, 1.0};

/// Real Bloch vector (x, y, z) of a traceless 2x2 Hamiltonian x sx + y sy + z sz.
struct Bloch {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Bloch operator+(const Bloch& a, const Bloch& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Bloch operator*(double s, const Bloch& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Bloch cross(const Bloch& a, const Bloch& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double dot(const Bloch& a, const Bloch& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline double norm(const Spinor& s) { return std::sqrt(std::norm(s[0]) + std::norm(s[1])); }
inline cplx inner(const Spinor& a, const Spinor& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

/// (b . sigma) psi
inline Spinor apply_pauli(const Bloch& b, const Spinor& s) {
  const cplx bm{b.x, -b.y};
  const cplx bp{b.x, b.y};
  return {b.z * s[0] + bm * s[1], bp * s[0] - b.z * s[1]};
}

/// Dimensionless sweep model: u0(tau) = tau^n, constant gap parameter.
struct ModelParams {
  int n = 1;
  double delta_tilde = 1.0;
  double tau0 = -100.0;
  double tauf = 100.0;

  void validate() const {
    if (n < 1 || n % 2 == 0) throw InvalidArgument("n", "sweep power must be an odd integer >= 1");
    if (!(delta_tilde > 0.0) || !std::isfinite(delta_tilde))
      throw InvalidArgument("delta_tilde", "must be a finite positive number");
    if (!std::isfinite(tau0) || !std::isfinite(tauf))
      throw InvalidArgument("tau0", "time window must be finite");
    if (!(tau0 < tauf)) throw InvalidArgument("tauf", "tau0 must be smaller than tauf");
  }
};

/// Amplitudes in the computational basis plus the time they refer to.
struct QuantumState {
  Spinor amplitudes{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
  double tau = 0.0;

  double norm() const { return tdres::norm(amplitudes); }
};

struct ControlFunction {
  std::function<double(double)> evaluator;
  std::string description;

  double operator()(double tau) const { return evaluator(tau); }
};

/// Eigenpairs of u sz + delta sx with |E+> = (cos t/2, sin t/2), |E-> = (sin t/2, -cos t/2).
struct EigenFrame {
  double energy = 0.0;
  double mixing_angle = 0.0;
  Spinor ground{};
  Spinor excited{};
};

/// Frame of z sz + x sx. The mixing angle is atan2(x, z), which lies in
/// (0, pi) whenever x > 0.
inline EigenFrame eigenframe_zx(double z, double x) {
  EigenFrame f;
  f.energy = std::hypot(z, x);
  f.mixing_angle = std::atan2(x, z);
  const double c = std::cos(0.5 * f.mixing_angle);
  const double s = std::sin(0.5 * f.mixing_angle);
  f.excited = {cplx{c, 0.0}, cplx{s, 0.0}};
  f.ground = {cplx{s, 0.0}, cplx{-c, 0.0}};
  return f;
}

inline EigenFrame eigenframe(double u_value, double delta_tilde) {
  if (!(delta_tilde > 0.0)) throw InvalidArgument("delta_tilde", "must be positive");
  return eigenframe_zx(u_value, delta_tilde);
}

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

inline cplx ipow(cplx x, int n) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

/// sqrt(tau^{2n} + delta^2).
inline double free_energy(double tau, const ModelParams& p) {
  const double tn = ipow(tau, p.n);
  return std::sqrt(tn * tn + p.delta_tilde * p.delta_tilde);
}

/// Principal branch of sqrt(tau^{2n} + delta^2) on complex tau.
inline cplx free_energy(cplx tau, const ModelParams& p) {
  const cplx tn = ipow(tau, p.n);
  return std::sqrt(tn * tn + p.delta_tilde * p.delta_tilde);
}

// ---------------------------------------------------------------------------
// Propagation

struct StepControl {
  /// Absolute upper bound on the step.
  double max_step = 0.1;
  /// Step is also bounded by energy_factor / |b(tau)| so that the fastest
  /// phase rotation is resolved.
  double energy_factor = 0.1;
  /// When positive, overrides the policy above with a fixed step (the last
  /// step before each output time is shortened to land on it).
  double fixed_step = 0.0;
  /// Local error tolerance for step doubling; zero disables adaptivity.
  double tolerance = 0.0;
  double min_step = 1e-12;
  /// Samples to record in addition to tau0 and tauf.
  std::vector<double> output_times;
};

using Trajectory = std::vector<QuantumState>;
using BlochField = std::function<Bloch(double)>;

/// One step of the two-point Gauss-Legendre Magnus integrator (order 4).
/// The exponential is evaluated in closed form so the step is exactly unitary.
inline Spinor magnus4_step(const BlochField& field, double tau, double h, const Spinor& psi) {
  static const double kOff = std::sqrt(3.0) / 6.0;
  const Bloch b1 = field(tau + (0.5 - kOff) * h);
  const Bloch b2 = field(tau + (0.5 + kOff) * h);
  if (!b1.finite() || !b2.finite())
    throw NumericalError("quantum-core", "propagate",
                         "non-finite Hamiltonian near tau=" + std::to_string(tau));
  // Omega = -i K,  K = h/2 (H1 + H2) + i sqrt(3)/12 h^2 [H1, H2]
  const Bloch k = (0.5 * h) * (b1 + b2) + (-kOff * h * h) * cross(b1, b2);
  const double kn = k.norm();
  if (kn == 0.0) return psi;
  const Spinor kp = apply_pauli((1.0 / kn) * k, psi);
  const double c = std::cos(kn);
  const double s = std::sin(kn);
  return {c * psi[0] - kI * s * kp[0], c * psi[1] - kI * s * kp[1]};
}

namespace detail {

inline std::vector<double> checkpoints(double tau0, double tauf, const std::vector<double>& outputs) {
  std::vector<double> pts;
  pts.reserve(outputs.size() + 1);
  for (double t : outputs)
    if (t > tau0 && t < tauf) pts.push_back(t);
  pts.push_back(tauf);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline double policy_step(const StepControl& ctrl, const BlochField& field, double tau) {
  if (ctrl.fixed_step > 0.0) return ctrl.fixed_step;
  const Bloch b = field(tau);
  if (!b.finite())
    throw NumericalError("quantum-core", "propagate",
                         "non-finite Hamiltonian at tau=" + std::to_string(tau));
  const double e = b.norm();
  double h = ctrl.max_step;
  if (e > 0.0) h = std::min(h, ctrl.energy_factor / e);
  return h;
}

}  // namespace detail

/// Integrates i d|psi>/dtau = (b(tau) . sigma)|psi> from tau0 to tauf.
/// Returns the state at tau0, at every requested output time inside the
/// window, and at tauf (sorted, without duplicates).
inline Trajectory propagate_bloch(const BlochField& field, const QuantumState& initial, double tau0,
                                  double tauf, const StepControl& ctrl = {}) {
  if (!(tau0 < tauf)) throw InvalidArgument("tauf", "tau0 must be smaller than tauf");
  if (std::abs(initial.norm() - 1.0) > 1e-9) throw InvalidArgument("initial", "state is not normalized");

  Trajectory out;
  out.push_back({initial.amplitudes, tau0});
  Spinor psi = initial.amplitudes;
  double tau = tau0;
  double h_adapt = std::numeric_limits<double>::infinity();

  for (double target : detail::checkpoints(tau0, tauf, ctrl.output_times)) {
    while (tau < target) {
      double h = std::min(detail::policy_step(ctrl, field, tau), h_adapt);
      const double remaining = target - tau;
      bool last = false;
      if (h >= remaining * (1.0 - 1e-12)) {
        h = remaining;
        last = true;
      }
      if (ctrl.tolerance > 0.0 && ctrl.fixed_step <= 0.0) {
        const Spinor full = magnus4_step(field, tau, h, psi);
        const Spinor half = magnus4_step(field, tau + 0.5 * h, 0.5 * h, magnus4_step(field, tau, 0.5 * h, psi));
        const double err = std::hypot(std::abs(full[0] - half[0]), std::abs(full[1] - half[1])) / 15.0;
        if (err > ctrl.tolerance) {
          h_adapt = 0.5 * h;
          if (h_adapt < ctrl.min_step)
            throw NumericalError("quantum-core", "propagate",
                                 "step size underflow at tau=" + std::to_string(tau));
          continue;
        }
        psi = half;
        const double grow = err > 0.0 ? 0.9 * std::pow(ctrl.tolerance / err, 0.2) : 2.0;
        h_adapt = h * std::clamp(grow, 1.0, 2.0);
      } else {
        if (h < ctrl.min_step && !last)
          throw NumericalError("quantum-core", "propagate",
                               "step size underflow at tau=" + std::to_string(tau));
        psi = magnus4_step(field, tau, h, psi);
      }
      tau = last ? target : tau + h;
    }
    out.push_back({psi, target});
  }
  return out;
}

/// Propagation under u(tau) sz + delta sx.
inline Trajectory propagate(const ControlFunction& control, double delta_tilde, const QuantumState& initial,
                            double tau0, double tauf, const StepControl& ctrl = {}) {
  const BlochField field = [&](double t) { return Bloch{delta_tilde, 0.0, control(t)}; };
  return propagate_bloch(field, initial, tau0, tauf, ctrl);
}

/// |<excited|psi>|^2 for the frame evaluated at the final time.
inline double transition_probability(const QuantumState& final_state, const EigenFrame& frame_final) {
  return std::norm(inner(frame_final.excited, final_state.amplitudes));
}

inline QuantumState ground_state(double u_value, double delta_tilde, double tau) {
  return {eigenframe(u_value, delta_tilde).ground, tau};
}

}  // namespace tdres
