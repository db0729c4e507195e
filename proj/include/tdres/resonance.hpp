#pragma once

// Time-dependent-resonance controls for the sweep model, closed-form
// optimal amplitudes, the first-order (Furry picture) transition estimate and
// the constant-frequency harmonic drive used for comparison.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/quadrature.hpp"
#include "tdres/special.hpp"
#include "tdres/stokes.hpp"

namespace tdres {

/// Oscillatory drive sum_k -alpha_k / E(tau) sin(phi(tau, tau_r,k) + xi_k)
/// on top of u0(tau) = tau^n. Vectors are aligned with `crossings`.
struct ResonanceProtocol {
  ModelParams params;
  std::vector<double> alphas;
  std::vector<double> phases;
  std::vector<double> crossings;

  void validate() const {
    params.validate();
    if (alphas.size() != crossings.size() || phases.size() != crossings.size())
      throw InvalidArgument("alphas", "amplitude, phase and crossing counts differ");
  }
};

inline ResonanceProtocol make_protocol(const ModelParams& p, const StokesGeometry& g, std::vector<double> alphas) {
  ResonanceProtocol r{p, std::move(alphas), std::vector<double>(g.crossings.size(), 0.0), g.crossings};
  r.validate();
  return r;
}

/// Phi(tau) = int_{tau0}^{tau} E(s) ds tabulated over the model window.
inline std::shared_ptr<const PhaseTable> energy_phase_table(const ModelParams& p, std::size_t nodes = 10001) {
  return std::make_shared<const PhaseTable>([p](double t) { return free_energy(t, p); }, p.tau0, p.tauf, nodes);
}

/// phi_n(tau, tau_ref) = 2 int_{tau_ref}^{tau} E(s) ds
inline double resonance_phase(const PhaseTable& table, double tau, double tau_ref) {
  return 2.0 * table.integral(tau_ref, tau);
}

inline ControlFunction build_control(const ResonanceProtocol& protocol, std::size_t table_nodes = 10001) {
  protocol.validate();
  const auto table = energy_phase_table(protocol.params, table_nodes);
  const ResonanceProtocol pr = protocol;
  std::vector<double> ref;
  for (double tr : pr.crossings) ref.push_back(table->antiderivative(tr));
  ControlFunction f;
  f.description = "tau^" + std::to_string(pr.params.n) + " + time-dependent resonance (" +
                  std::to_string(pr.alphas.size()) + " components)";
  f.evaluator = [pr, table, ref](double tau) {
    double u = ipow(tau, pr.params.n);
    bool any = false;
    for (double a : pr.alphas) any = any || a != 0.0;
    if (!any) return u;
    const double e = free_energy(tau, pr.params);
    const double phi = table->antiderivative(tau);
    for (std::size_t k = 0; k < pr.alphas.size(); ++k)
      u -= pr.alphas[k] / e * std::sin(2.0 * (phi - ref[k]) + pr.phases[k]);
    return u;
  };
  return f;
}

/// int_{tau0}^{tauf} E^{-2}(s) ds
inline double inverse_energy_integral(const ModelParams& p) {
  return integrate([&p](double t) { return 1.0 / (ipow(t, 2 * p.n) + p.delta_tilde * p.delta_tilde); }, p.tau0,
                   p.tauf);
}

/// alpha_k,opt = 2 (-1)^k e^{-2 D_k} / (delta int E^{-2}), aligned with the crossings.
inline std::vector<double> optimal_amplitudes(const ModelParams& p, const StokesGeometry& g) {
  const double denom = p.delta_tilde * inverse_energy_integral(p);
  std::vector<double> out;
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const double sign = g.indices[i] % 2 == 0 ? 1.0 : -1.0;
    out.push_back(2.0 * sign * std::exp(-2.0 * g.actions[i]) / denom);
  }
  return out;
}

struct PerturbativeEstimate {
  double pe = 0.0;
  cplx amplitude{};
  /// max_k |alpha_k delta / 2 int E^{-2}|, the first-order correction size.
  double correction = 0.0;
  /// False once the first-order correction exceeds 0.5.
  bool valid = true;
};

inline PerturbativeEstimate predict_Pe_perturbative(const ModelParams& p, const std::vector<double>& alphas,
                                                    const StokesGeometry& g) {
  if (alphas.size() != g.crossings.size()) throw InvalidArgument("alphas", "one amplitude per crossing required");
  const auto energy = [&p](double t) { return free_energy(t, p); };
  const double inv = inverse_energy_integral(p);
  PerturbativeEstimate est;
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const double tr = g.crossings[i];
    const cplx phase = std::polar(1.0, integrate(energy, p.tau0, tr) - integrate(energy, tr, p.tauf));
    const double sign = g.indices[i] % 2 == 0 ? 1.0 : -1.0;
    const double corr = alphas[i] * p.delta_tilde * 0.5 * inv;
    est.correction = std::max(est.correction, std::abs(corr));
    est.amplitude += phase * (sign * std::exp(-2.0 * g.actions[i]) - corr);
  }
  est.pe = std::norm(est.amplitude);
  est.valid = est.correction <= 0.5;
  return est;
}

// ---------------------------------------------------------------------------
// Harmonic drive u(tau) = tau + A sin(omega tau)

struct HarmonicProtocol {
  double amplitude = 0.0;
  double omega_tilde = 2.0;
};

inline cplx harmonic_hypergeometric(double delta_tilde, double omega_tilde) {
  return regularized_confluent_hypergeometric(cplx{0.0, -0.5 * delta_tilde * delta_tilde}, 0.0,
                                              cplx{0.0, 0.5 * omega_tilde});
}

struct HarmonicEstimate {
  double pe = 0.0;
  cplx hypergeometric{};
  /// arg C with |C| = 1, chosen so that C * 1F1~ = -|1F1~|.
  double c_phase = 0.0;
};

inline HarmonicEstimate harmonic_Pe(double delta_tilde, double amplitude, double omega_tilde) {
  if (!(delta_tilde > 0.0)) throw InvalidArgument("delta_tilde", "must be positive");
  HarmonicEstimate h;
  h.hypergeometric = harmonic_hypergeometric(delta_tilde, omega_tilde);
  const cplx c = std::abs(h.hypergeometric) > 0.0 ? -std::conj(h.hypergeometric) / std::abs(h.hypergeometric)
                                                  : cplx{-1.0, 0.0};
  h.c_phase = std::arg(c);
  const cplx bracket = 1.0 + std::sqrt(2.0) * c * amplitude * std::numbers::pi * h.hypergeometric;
  h.pe = std::exp(-std::numbers::pi * delta_tilde * delta_tilde) * std::norm(bracket);
  return h;
}

inline double harmonic_optimal_amplitude(double delta_tilde, double omega_tilde) {
  const double m = std::abs(harmonic_hypergeometric(delta_tilde, omega_tilde));
  if (m < 1e-14)
    throw NumericalError("resonance", "harmonic_optimal_amplitude", "|1F1~| below 1e-14: optimum undefined");
  return 1.0 / (std::sqrt(2.0) * std::numbers::pi * m);
}

inline ControlFunction harmonic_control(int n, const HarmonicProtocol& h) {
  return {[n, h](double t) { return ipow(t, n) + h.amplitude * std::sin(h.omega_tilde * t); },
          "tau^n + A sin(omega tau)"};
}

// ---------------------------------------------------------------------------

struct ScalingReport {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::vector<double> scales;
  std::vector<double> pe;
};

/// Least-squares slope of log10 P_e against log10(alpha scale) for the
/// perturbative estimate with every amplitude scaled by s * alpha_opt,
/// s log-spaced over [s_min, s_max].
inline ScalingReport large_amplitude_scaling_report(const ModelParams& p, const StokesGeometry& g,
                                                    double s_min = 10.0, double s_max = 100.0, int points = 25) {
  const auto opt = optimal_amplitudes(p, g);
  ScalingReport r;
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < points; ++i) {
    const double s = s_min * std::pow(s_max / s_min, static_cast<double>(i) / (points - 1));
    std::vector<double> a;
    for (double v : opt) a.push_back(s * v);
    const double pe = predict_Pe_perturbative(p, a, g).pe;
    r.scales.push_back(s);
    r.pe.push_back(pe);
    x.push_back(std::log10(s));
    y.push_back(std::log10(pe));
  }
  const double n = static_cast<double>(points);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < points; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.intercept = (sy - r.slope * sx) / n;
  double ss = 0.0;
  for (int i = 0; i < points; ++i) {
    const double d = y[i] - (r.intercept + r.slope * x[i]);
    ss += d * d;
  }
  r.residual_rms = std::sqrt(ss / n);
  return r;
}

}  // namespace tdres
