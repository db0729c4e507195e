// Acceptance report: one PASS/FAIL line per criterion. Exit status 1 when any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "support.hpp"
#include "tdres/anneal.hpp"
#include "tdres/multilevel.hpp"
#include "tdres/optctl.hpp"
#include "tdres/resonance.hpp"
#include "tdres/special.hpp"

using namespace tdres;
using tdres::testing::numeric_pe;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string fmt(const char* f, T... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

int slot_of(const StokesGeometry& g, int k) {
  for (std::size_t i = 0; i < g.indices.size(); ++i)
    if (g.indices[i] == k) return static_cast<int>(i);
  return -1;
}

double closed_form_alpha(double d) { return 2.0 / kPi * std::exp(-d * d * kPi / 2.0); }

double pe_with(const ModelParams& p, const StokesGeometry& g, const std::vector<double>& a) {
  return numeric_pe(p, build_control(make_protocol(p, g, a)));
}

struct SweepRun {
  OptProblem problem;
  OptimizeResult result;
  StokesGeometry geometry;
  FitSummary fit;
  double shape_error = 0.0;
};

SweepRun optimize_sweep(int n, double delta, std::size_t intervals) {
  const ModelParams p{n, delta, -5.0, 5.0};
  SweepRun r;
  r.problem = sweep_problem(p, intervals);
  r.result = optimize(r.problem);
  r.geometry = stokes_geometry(p);
  const auto u0 = [n](double t) { return ipow(t, n); };
  const ResonanceBasis basis{[p](double t) { return free_energy(t, p); }, energy_phase_table(p), r.geometry.crossings,
                             false};
  r.fit = fit_resonance(r.result.grid, u0, basis);
  const ControlFunction analytic = build_control(make_protocol(p, r.geometry, optimal_amplitudes(p, r.geometry)));
  r.shape_error = oscillation_shape_error(r.result.grid, u0, [&](double t) { return analytic(t); });
  return r;
}

void lzsm_limit() {
  double worst = 0.0;
  for (double d : {0.5, 1.0}) {
    const double num = numeric_pe({1, d, -100.0, 100.0}, tdres::testing::power_sweep(1));
    worst = std::max(worst, std::abs(num / std::exp(-kPi * d * d) - 1.0));
  }
  report(1, "LZSM exact limit", worst <= 0.02, fmt("max relative deviation %.3g (tol 0.02)", worst));
}

void linear_sweep_scan() {
  const ModelParams p{1, 1.0, -100.0, 100.0};
  const StokesGeometry g = stokes_geometry(p);
  const double aopt = optimal_amplitudes(p, g)[0];
  std::vector<double> alphas;
  std::vector<double> num;
  double worst = 0.0;
  double worst_at = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double a = 0.3 * i / 60.0;
    alphas.push_back(a);
    num.push_back(pe_with(p, g, {a}));
    if (a <= 1.5 * aopt) {
      const double rel = std::abs(predict_Pe_perturbative(p, {a}, g).pe / num.back() - 1.0);
      if (rel > worst) {
        worst = rel;
        worst_at = a;
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(num.begin(), num.end()) - num.begin());
  // refine the grid minimum by golden section on the propagated P_e
  double lo = alphas[best > 0 ? best - 1 : 0];
  double hi = alphas[std::min(best + 1, alphas.size() - 1)];
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 40; ++i) {
    const double c = hi - r * (hi - lo);
    const double d = lo + r * (hi - lo);
    if (pe_with(p, g, {c}) < pe_with(p, g, {d})) hi = d;
    else lo = c;
  }
  const double amin = 0.5 * (lo + hi);
  const double pmin = pe_with(p, g, {amin});
  const double shift = std::abs(amin / closed_form_alpha(1.0) - 1.0);
  const bool a = worst <= 0.10;
  const bool b = shift <= 0.10;
  const bool c = pmin <= 0.05 * num.front();
  report(2, "linear sweep amplitude scan", a && b && c,
         fmt("(a) max analytic/numeric relative error %.3g at alpha=%.4g (tol 0.10) %s; "
             "(b) minimum at %.5g, %.3g from %.5f (tol 0.10) %s; (c) Pe_min/Pe(0) = %.3g (tol 0.05) %s",
             worst, worst_at, a ? "ok" : "FAIL", amin, shift, closed_form_alpha(1.0), b ? "ok" : "FAIL",
             pmin / num.front(), c ? "ok" : "FAIL"));
}

void cubic_sweep_scan() {
  const ModelParams p{3, 1.0, -5.0, 5.0};
  const StokesGeometry g = stokes_geometry(p);
  const auto opt = optimal_amplitudes(p, g);
  const auto s = static_cast<std::size_t>(slot_of(g, 0));
  auto a = opt;
  a[s] = 0.0;
  const double p0 = pe_with(p, g, a);
  a[s] = opt[s];
  const double popt = pe_with(p, g, a);
  double worst = 0.0;
  for (double f : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25}) {
    a[s] = f * opt[s];
    worst = std::max(worst, std::abs(predict_Pe_perturbative(p, a, g).pe / pe_with(p, g, a) - 1.0));
  }
  const bool sup = popt <= 0.10 * p0;
  const bool agree = worst <= 0.15;
  report(3, "cubic sweep amplitude scan", sup && agree,
         fmt("Pe(alpha0_opt)/Pe(0) = %.3g (tol 0.10) %s; small-alpha0 (<= 0.25 alpha0_opt) max relative error "
             "%.3g (tol 0.15) %s",
             popt / p0, sup ? "ok" : "FAIL", worst, agree ? "ok" : "FAIL"));
}

void stokes_geometry_check() {
  const ModelParams p1{1, 1.0, -5.0, 5.0};
  const StokesGeometry g1 = stokes_geometry(p1);
  const ModelParams p3{3, 1.0, -5.0, 5.0};
  const StokesGeometry g3 = stokes_geometry(p3);
  TraceOptions fine;
  fine.max_step_factor /= 10.0;
  fine.curvature_factor /= 10.0;
  fine.seed_factor /= 10.0;
  const StokesGeometry f3 = stokes_geometry(sweep_surface(p3), p3.tau0, p3.tauf, std::nullopt, fine);
  const bool one = g1.crossings.size() == 1 && std::abs(g1.crossings[0]) <= 1e-6;
  const bool three = g3.crossings.size() == 3 && f3.crossings.size() == 3 && std::abs(g3.crossings[1]) <= 1e-6 &&
                     std::abs(g3.crossings[0] + g3.crossings[2]) <= 1e-6 &&
                     std::abs(g3.crossings[2] - f3.crossings[2]) <= 1e-6;
  const double dev = g1.actions.empty() ? 1.0 : std::abs(g1.actions[0] - kPi / 4.0);
  report(4, "Stokes geometry", one && three && dev <= 1e-6,
         fmt("n=1 crossing %.3g; n=3 crossings {%.9f, %.3g, %.9f}, fine tracing tau* %.9f; |D0 - pi/4| = %.3g",
             g1.crossings.empty() ? NAN : g1.crossings[0], g3.crossings.size() == 3 ? g3.crossings[0] : NAN,
             g3.crossings.size() == 3 ? g3.crossings[1] : NAN, g3.crossings.size() == 3 ? g3.crossings[2] : NAN,
             f3.crossings.size() == 3 ? f3.crossings[2] : NAN, dev));
}

void optimal_control_convergence() {
  const SweepRun r = optimize_sweep(1, 0.5, 2000);
  bool monotone = true;
  for (std::size_t i = 1; i < r.result.log.size(); ++i)
    monotone = monotone && r.result.log[i].objective <= r.result.log[i - 1].objective;
  const auto u = r.result.grid.values;
  const auto g = gradient(r.problem, u, forward_backward(r.problem, u));
  double interior = 0.0;
  for (std::size_t j = 1; j + 1 < g.size(); ++j)
    if (u[j] > r.result.grid.lower && u[j] < r.result.grid.upper) interior = std::max(interior, std::abs(g[j]));
  const double pg_opt = ground_state_probability_trace(r.problem, u, forward_backward(r.problem, u)).back();
  const double pg_0 =
      ground_state_probability_trace(r.problem, r.problem.grid.values, forward_backward(r.problem)).back();
  const bool ok = monotone && pg_opt > pg_0 && interior < 1e-6;
  report(5, "optimal-control convergence", ok,
         fmt("%zu iterations, J monotone: %s; final P_g %.9f vs baseline %.9f; interior |g| %.3g (tol 1e-6)",
             r.result.log.size() - 1, monotone ? "yes" : "no", pg_opt, pg_0, interior));
}

void resonance_fit_agreement() {
  std::vector<double> fitted;
  for (double d : {1.0 / 3.0, 2.0 / 3.0, 1.0}) {
    const SweepRun r = optimize_sweep(1, d, 2000);
    fitted.push_back(r.fit.components[static_cast<std::size_t>(slot_of(r.geometry, 0))].alpha);
  }
  const double rel = std::abs(fitted[2] / closed_form_alpha(1.0) - 1.0);
  const bool trend = fitted[0] > fitted[1] && fitted[1] > fitted[2];
  report(6, "resonance-fit agreement", rel <= 0.5 && trend,
         fmt("fitted alpha0 at delta 1/3, 2/3, 1: %.4g, %.4g, %.4g; delta=1 vs %.5f: %.3g (tol 0.5); decreasing: %s",
             fitted[0], fitted[1], fitted[2], closed_form_alpha(1.0), rel, trend ? "yes" : "no"));
}

void cubic_shape_agreement() {
  std::vector<double> err;
  for (double d : {1.5, 2.0, 2.5}) err.push_back(optimize_sweep(3, d, 10000).shape_error);
  const bool within = *std::max_element(err.begin(), err.end()) <= 0.2;
  const bool improving = err[0] > err[1] && err[1] > err[2];
  report(7, "cubic control-shape agreement", within && improving,
         fmt("relative RMS difference at delta 1.5, 2, 2.5: %.3g, %.3g, %.3g; <= 0.2: %s; improving: %s", err[0],
             err[1], err[2], within ? "yes" : "no", improving ? "yes" : "no"));
}

void annealing_window() {
  const AnnealSpec s3{3, 10.0, 10.0};
  const StokesGeometry g3 = anneal_geometry(s3);
  const auto tuned3 = tune_complex_amplitudes(s3, g3, FreeAmplitudeSource::propagated);
  const bool single = g3.crossings.size() == 1;
  bool zeros = single && tuned3.size() == 3;
  for (std::size_t k = 0; zeros && k < 3; ++k)
    if (static_cast<int>(k) != g3.indices[0]) zeros = tuned3[k].alpha_tilde == 0.0;

  double cross_dev = 0.0;
  for (double dz : {10.0, 20.0, 40.0, 80.0}) {
    const double dx = dz / 2.0;
    const StokesGeometry g = anneal_geometry({1, dx, dz});
    cross_dev = std::max(cross_dev, g.crossings.size() == 1 ? std::abs(g.crossings[0] - dx * dx / (dx * dx + dz * dz))
                                                           : 1.0);
  }

  const AnnealSpec s{1, 40.0, 80.0};
  const StokesGeometry g = anneal_geometry(s);
  const cplx tuned = tune_complex_amplitudes(s, g, FreeAmplitudeSource::propagated)[0].value();
  const OptimizeResult opt = optimize(anneal_problem(s, 2000));
  const cplx fit = fit_resonance(opt.grid, [](double t) { return t; }, anneal_basis(s, g)).components[0].complex_amplitude;
  const double re = std::abs(fit.real() / tuned.real() - 1.0);
  const double im = std::abs(fit.imag() / tuned.imag() - 1.0);
  const bool ok = single && zeros && cross_dev <= 1e-6 && re <= 0.3 && im <= 0.3;
  report(8, "annealing window", ok,
         fmt("n=3 crossings in [0,1]: %zu, other tuned amplitudes zero: %s; n=1 crossing deviation %.3g; "
             "dbar_z=80 tuned (%.4g, %.4g) vs fitted (%.4g, %.4g): re %.3g, im %.3g (tol 0.3)",
             g3.crossings.size(), zeros ? "yes" : "no", cross_dev, tuned.real(), tuned.imag(), fit.real(), fit.imag(),
             re, im));
}

void gradient_check() {
  auto gen = tdres::testing::rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int problem = 0; problem < 5; ++problem) {
    const int n = problem % 2 == 0 ? 1 : 3;
    const double d = 0.3 + 1.7 * unit(gen);
    const double tf = 2.0 + 3.0 * unit(gen);
    OptProblem p = sweep_problem({n, d, -tf, tf}, 400);
    std::vector<double> u = p.grid.values;
    const double span = p.grid.upper - p.grid.lower;
    for (double& v : u) v = std::clamp(v + 0.05 * span * (unit(gen) - 0.5), p.grid.lower, p.grid.upper);
    const auto g = gradient(p, u, forward_backward(p, u));
    std::uniform_int_distribution<std::size_t> node(0, u.size() - 1);
    for (int i = 0; i < 20; ++i) {
      const std::size_t j = node(gen);
      auto up = u;
      auto dn = u;
      up[j] += eps;
      dn[j] -= eps;
      const double fd = (objective(p, up) - objective(p, dn)) / (2.0 * eps);
      worst = std::max(worst, std::abs(g[j] - fd) / std::max(1.0, std::abs(g[j])));
    }
  }
  report(9, "gradient correctness", worst <= 1e-6, fmt("max |g - FD| / max(1,|g|) = %.3g (tol 1e-6)", worst));
}

void harmonic_comparison() {
  bool smaller = true;
  bool decreasing = true;
  double prev = INFINITY;
  double oracle = 0.0;
  std::string ratios;
  for (int i = 0; i <= 10; ++i) {
    const double d = 1.0 + 0.1 * i;
    const ModelParams p{1, d, -1e4, 1e4};
    const double alpha = optimal_amplitudes(p, stokes_geometry(p))[0];
    const double amp = harmonic_optimal_amplitude(d, 2.0 * d);
    const double ratio = alpha / amp;
    smaller = smaller && alpha < amp;
    decreasing = decreasing && ratio < prev;
    prev = ratio;
    if (i % 5 == 0) ratios += fmt("%s%.3g", ratios.empty() ? "" : ", ", ratio);
    const cplx a{0.0, -0.5 * d * d};
    const cplx z{0.0, d};
    const double e = 1e-6;
    const cplx limit = 2.0 * regularized_confluent_hypergeometric(a, e, z) - regularized_confluent_hypergeometric(a, 2.0 * e, z);
    oracle = std::max(oracle, std::abs(regularized_confluent_hypergeometric(a, 0.0, z) - limit));
  }
  report(10, "harmonic comparison", smaller && decreasing && oracle <= 1e-5,
         fmt("alpha_opt < A_opt on [1,2]: %s; ratio decreasing: %s (delta 1, 1.5, 2: %s); b->0 oracle error %.3g "
             "(tol 1e-5)",
             smaller ? "yes" : "no", decreasing ? "yes" : "no", ratios.c_str(), oracle));
}

void multilevel_suppression() {
  const SuppressionReport r = first_excited_amplitude(std::make_shared<const GapModel>(reference_three_level()));
  const double reduction = r.p01_free / r.p01_controlled;
  const double change = std::max(r.p0m_controlled / r.p0m_free, r.p0m_free / r.p0m_controlled);

  const double dx = 10.0;
  const double dz = 20.0;
  const AnnealSpec a{1, dx, dz};
  const StokesGeometry g = anneal_geometry(a);
  const auto tuned = tune_complex_amplitudes(a, g, FreeAmplitudeSource::propagated);
  const double anneal_free = std::norm(anneal_free_amplitude(a, g, FreeAmplitudeSource::propagated));
  const double anneal_ctl = std::norm(anneal_propagated_amplitude(a, anneal_control(a, tuned, g)));
  const SuppressionReport r2 = first_excited_amplitude(std::make_shared<const GapModel>(two_level_spec(dx, dz)));
  const double n2 = std::max({std::abs(r2.p01_free / anneal_free - 1.0),
                              // controlled value is a cancellation residue; its error scales with the free one
                              std::abs(r2.p01_controlled - anneal_ctl) / anneal_free,
                              std::abs(r2.alpha / two_level_alpha_mapping(tuned[0].alpha_tilde, dx, dz) - 1.0)});
  const bool ok = reduction >= 5.0 && change < 2.0 && n2 <= 1e-6;
  report(11, "multilevel suppression", ok,
         fmt("P(0->1) %.4g -> %.4g (reduction %.3g, need >= 5); P(0->2) %.4g -> %.4g (factor %.3g, need < 2); "
             "N=2 vs anneal max relative difference %.3g (tol 1e-6)",
             r.p01_free, r.p01_controlled, reduction, r.p0m_free, r.p0m_controlled, change, n2));
}

void scaling_law() {
  std::string detail;
  bool ok = true;
  for (double d : {1.0, 2.0}) {
    const ModelParams p{1, d, -100.0, 100.0};
    const ScalingReport r = large_amplitude_scaling_report(p, stokes_geometry(p));
    ok = ok && std::abs(r.slope - 2.0) <= 0.1;
    detail += fmt("%sdelta=%g slope %.4f", detail.empty() ? "" : "; ", d, r.slope);
  }
  report(12, "scaling law", ok, detail + " (tol 2.0 +- 0.1)");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{lzsm_limit,
                                                  linear_sweep_scan,
                                                  cubic_sweep_scan,
                                                  stokes_geometry_check,
                                                  optimal_control_convergence,
                                                  resonance_fit_agreement,
                                                  cubic_shape_agreement,
                                                  annealing_window,
                                                  gradient_check,
                                                  harmonic_comparison,
                                                  multilevel_suppression,
                                                  scaling_law};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "error", false, e.what());
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
