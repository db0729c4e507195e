#pragma once

// Annealing-type schedule on [0, 1]:
//   H(tau) = dbar_x (1 - u) sx + dbar_z u sz,  u0(tau) = tau^n,
// with the resonance drive entering through u = tau^n + c(tau).

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/optctl.hpp"
#include "tdres/quadrature.hpp"
#include "tdres/stokes.hpp"

namespace tdres {

struct AnnealSpec {
  int n = 1;
  double dbar_x = 10.0;
  double dbar_z = 10.0;

  void validate() const {
    if (n < 1 || n % 2 == 0) throw InvalidArgument("n", "schedule power must be an odd integer >= 1");
    if (!(dbar_x > 0.0) || !std::isfinite(dbar_x)) throw InvalidArgument("dbar_x", "must be a finite positive number");
    if (!(dbar_z > 0.0) || !std::isfinite(dbar_z)) throw InvalidArgument("dbar_z", "must be a finite positive number");
  }

  Bloch field(double u) const { return {dbar_x * (1.0 - u), 0.0, dbar_z * u}; }
  /// Direction multiplying c(tau): -dbar_x sx + dbar_z sz.
  Bloch control_direction() const { return {-dbar_x, 0.0, dbar_z}; }
};

/// alpha e^{-i xi} in polar form, alpha >= 0 and xi in (-pi, pi].
struct ComplexAmplitude {
  double alpha_tilde = 0.0;
  double xi = 0.0;

  cplx value() const { return std::polar(alpha_tilde, -xi); }

  static ComplexAmplitude from_value(cplx v) {
    ComplexAmplitude a{std::abs(v), -std::arg(v)};
    if (a.xi <= -std::numbers::pi) a.xi += 2.0 * std::numbers::pi;
    if (a.alpha_tilde == 0.0) a.xi = 0.0;
    return a;
  }
};

inline cplx anneal_energy_squared(cplx tau, const AnnealSpec& s) {
  const cplx tn = ipow(tau, s.n);
  const cplx a = (1.0 - tn) * s.dbar_x;
  const cplx b = tn * s.dbar_z;
  return a * a + b * b;
}

inline double anneal_energy(double tau, const AnnealSpec& s) {
  const double tn = ipow(tau, s.n);
  return std::hypot((1.0 - tn) * s.dbar_x, tn * s.dbar_z);
}

/// Principal branch on complex tau.
inline cplx anneal_energy(cplx tau, const AnnealSpec& s) { return std::sqrt(anneal_energy_squared(tau, s)); }

/// The 2n zeros of the squared energy: tau^n = dbar_x (dbar_x +- i dbar_z) / (dbar_x^2 + dbar_z^2).
inline std::vector<TurningPoint> anneal_turning_points(const AnnealSpec& s) {
  s.validate();
  const double nrm = s.dbar_x * s.dbar_x + s.dbar_z * s.dbar_z;
  std::vector<cplx> roots;
  for (double sign : {1.0, -1.0}) {
    const cplx w = s.dbar_x * cplx{s.dbar_x, sign * s.dbar_z} / nrm;
    const double r = std::pow(std::abs(w), 1.0 / s.n);
    const double a = std::arg(w) / s.n;
    for (int k = 0; k < s.n; ++k) roots.push_back(std::polar(r, a + 2.0 * std::numbers::pi * k / s.n));
  }
  return label_turning_points(roots);
}

inline EnergySurface anneal_surface(const AnnealSpec& s) {
  s.validate();
  EnergySurface e;
  const int n = s.n;
  const double dx2 = s.dbar_x * s.dbar_x;
  const double dz2 = s.dbar_z * s.dbar_z;
  e.squared = [s](cplx t) { return anneal_energy_squared(t, s); };
  e.squared_derivative = [n, dx2, dz2](cplx t) {
    const cplx tn = ipow(t, n);
    const cplx d = static_cast<double>(n) * ipow(t, n - 1);
    return 2.0 * d * ((tn - 1.0) * dx2 + tn * dz2);
  };
  e.turning_points = anneal_turning_points(s);
  e.scale = std::max(1.0, std::abs(e.turning_points.front().location));
  return e;
}

/// Stokes geometry restricted to the annealing window [0, 1].
inline StokesGeometry anneal_geometry(const AnnealSpec& s, const TraceOptions& opt = {}) {
  const EnergySurface e = anneal_surface(s);
  return stokes_geometry(e, 0.0, 1.0, std::nullopt, opt);
}

/// Tabulated int_0^tau E(s) ds over [0, 1].
inline std::shared_ptr<const PhaseTable> anneal_phase_table(const AnnealSpec& s, std::size_t nodes = 10001) {
  return std::make_shared<const PhaseTable>([s](double t) { return anneal_energy(t, s); }, 0.0, 1.0, nodes);
}

/// Amplitudes indexed by turning-point index k. Indices without a retained
/// crossing are ignored.
using AnnealAmplitudes = std::vector<ComplexAmplitude>;

/// u(tau) = tau^n + c(tau), c = sum_k -alpha_k / E sin(phi(tau, tau_r,k) + xi_k).
inline ControlFunction anneal_control(const AnnealSpec& s, const AnnealAmplitudes& amps, const StokesGeometry& g,
                                      std::size_t table_nodes = 10001) {
  s.validate();
  const auto table = anneal_phase_table(s, table_nodes);
  struct Term {
    double alpha;
    double xi;
    double ref;
  };
  std::vector<Term> terms;
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const auto k = static_cast<std::size_t>(g.indices[i]);
    if (k >= amps.size() || amps[k].alpha_tilde == 0.0) continue;
    terms.push_back({amps[k].alpha_tilde, amps[k].xi, table->antiderivative(g.crossings[i])});
  }
  ControlFunction f;
  f.description = "tau^" + std::to_string(s.n) + " + annealing resonance (" + std::to_string(terms.size()) +
                  " components)";
  f.evaluator = [s, table, terms](double tau) {
    double u = ipow(tau, s.n);
    if (terms.empty()) return u;
    const double e = anneal_energy(tau, s);
    const double phi = table->antiderivative(tau);
    for (const auto& t : terms) u -= t.alpha / e * std::sin(2.0 * (phi - t.ref) + t.xi);
    return u;
  };
  return f;
}

/// The c(tau) part of a control built by anneal_control.
inline double anneal_coefficient(const ControlFunction& u, const AnnealSpec& s, double tau) {
  return u(tau) - ipow(tau, s.n);
}

inline BlochField anneal_field(const AnnealSpec& s, const ControlFunction& u) {
  return [s, u](double t) { return s.field(u(t)); };
}

/// <E+(1)|U|E-(0)> for the given schedule, by direct propagation.
inline cplx anneal_propagated_amplitude(const AnnealSpec& s, const ControlFunction& u, const StepControl& ctrl = {}) {
  const Bloch b0 = s.field(u(0.0));
  const Bloch b1 = s.field(u(1.0));
  const QuantumState init{eigenframe_zx(b0.z, b0.x).ground, 0.0};
  const Trajectory tr = propagate_bloch(anneal_field(s, u), init, 0.0, 1.0, ctrl);
  return inner(eigenframe_zx(b1.z, b1.x).excited, tr.back().amplitudes);
}

enum class FreeAmplitudeSource { wkb, propagated };

/// Transition amplitude of the bare schedule on [0, 1].
inline cplx anneal_free_amplitude(const AnnealSpec& s, const StokesGeometry& g,
                                  FreeAmplitudeSource src = FreeAmplitudeSource::wkb) {
  if (src == FreeAmplitudeSource::propagated) {
    const int n = s.n;
    return anneal_propagated_amplitude(s, {[n](double t) { return ipow(t, n); }, "tau^n"});
  }
  return wkb_transition_amplitude([&s](double t) { return anneal_energy(t, s); }, g, 0.0, 1.0);
}

/// e^{i int_0^{tau_r} E} e^{-i int_{tau_r}^1 E} for every retained crossing.
inline std::vector<cplx> anneal_crossing_phases(const AnnealSpec& s, const StokesGeometry& g) {
  const auto energy = [&s](double t) { return anneal_energy(t, s); };
  std::vector<cplx> out;
  for (double tr : g.crossings) out.push_back(std::polar(1.0, integrate(energy, 0.0, tr) - integrate(energy, tr, 1.0)));
  return out;
}

inline double anneal_inverse_energy_integral(const AnnealSpec& s) {
  return integrate([&s](double t) { return 1.0 / (anneal_energy(t, s) * anneal_energy(t, s)); }, 0.0, 1.0);
}

struct AnnealEstimate {
  double pe = 0.0;
  cplx free_amplitude{};
  cplx first_order{};
};

/// |A_free - (dbar_x dbar_z / 2) sum_k phase_k alpha_k e^{-i xi_k} int_0^1 E^{-2}|^2
inline AnnealEstimate anneal_Pe_perturbative(const AnnealSpec& s, const AnnealAmplitudes& amps,
                                             const StokesGeometry& g,
                                             FreeAmplitudeSource src = FreeAmplitudeSource::wkb) {
  AnnealEstimate est;
  est.free_amplitude = anneal_free_amplitude(s, g, src);
  const auto phases = anneal_crossing_phases(s, g);
  const double inv = anneal_inverse_energy_integral(s);
  for (std::size_t i = 0; i < g.crossings.size(); ++i) {
    const auto k = static_cast<std::size_t>(g.indices[i]);
    if (k >= amps.size()) continue;
    est.first_order -= 0.5 * s.dbar_x * s.dbar_z * phases[i] * amps[k].value() * inv;
  }
  est.pe = std::norm(est.free_amplitude + est.first_order);
  return est;
}

/// Amplitudes (indexed by k, length n) that cancel the free amplitude at first
/// order. The whole free amplitude is assigned to the earliest retained
/// crossing; every other index gets zero.
inline AnnealAmplitudes tune_complex_amplitudes(const AnnealSpec& s, const StokesGeometry& g,
                                                FreeAmplitudeSource src = FreeAmplitudeSource::wkb) {
  AnnealAmplitudes out(static_cast<std::size_t>(s.n));
  if (g.crossings.empty()) return out;
  const cplx free = anneal_free_amplitude(s, g, src);
  const cplx phase = anneal_crossing_phases(s, g).front();
  const double inv = anneal_inverse_energy_integral(s);
  const cplx v = free * std::conj(phase) * 2.0 / (s.dbar_x * s.dbar_z * inv);
  out[static_cast<std::size_t>(g.indices.front())] = ComplexAmplitude::from_value(v);
  return out;
}

/// Optimal-control problem for the schedule: u in [lower, upper], start in the
/// ground state at tau = 0, minimize the final energy dbar_z <sz>.
inline OptProblem anneal_problem(const AnnealSpec& s, std::size_t intervals, double lower = 0.0,
                                 double upper = 1.0) {
  s.validate();
  OptProblem p;
  p.drift = {s.dbar_x, 0.0, 0.0};
  p.control = s.control_direction();
  p.cost = s.field(1.0);
  const Bloch b0 = s.field(0.0);
  p.initial = eigenframe_zx(b0.z, b0.x).ground;
  const int n = s.n;
  p.grid = ControlGrid::sample([n](double t) { return ipow(t, n); }, 0.0, 1.0, intervals, lower, upper);
  return p;
}

inline ResonanceBasis anneal_basis(const AnnealSpec& s, const StokesGeometry& g) {
  return {[s](double t) { return anneal_energy(t, s); }, anneal_phase_table(s), g.crossings, true};
}

}  // namespace tdres
