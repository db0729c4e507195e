#pragma once

// N-level annealing Hamiltonians H(tau) = dbar_x (1 - u) Hx + dbar_z u Hp with
// u = tau + c(tau): spectrum tracking, the ground/first-excited gap, the
// single-resonance control and its first-order suppression estimate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/quadrature.hpp"

namespace tdres {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct MultiLevelSpec {
  RealMatrix hx;
  RealMatrix hprob;
  double dbar_x = 8.0;
  double dbar_z = 8.0;

  Eigen::Index size() const { return hx.rows(); }

  void validate() const {
    if (hx.rows() < 2 || hx.rows() != hx.cols()) throw InvalidArgument("hx", "must be a square matrix, N >= 2");
    if (hprob.rows() != hx.rows() || hprob.cols() != hx.cols())
      throw InvalidArgument("hprob", "must have the same shape as hx");
    if ((hx - hx.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("hx", "not symmetric");
    if ((hprob - hprob.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("hprob", "not symmetric");
    if (!(dbar_x > 0.0) || !std::isfinite(dbar_x)) throw InvalidArgument("dbar_x", "must be a finite positive number");
    if (!(dbar_z > 0.0) || !std::isfinite(dbar_z)) throw InvalidArgument("dbar_z", "must be a finite positive number");
  }

  RealMatrix hamiltonian(double u) const { return dbar_x * (1.0 - u) * hx + dbar_z * u * hprob; }
  /// -dbar_x Hx + dbar_z Hp, the operator multiplying c(tau).
  RealMatrix control_operator() const { return -dbar_x * hx + dbar_z * hprob; }
};

/// Reference three-level fixture: transverse coupling -(J - I), Hp = diag(0, 1, 2).
inline MultiLevelSpec reference_three_level(double dbar_x = 8.0, double dbar_z = 8.0) {
  MultiLevelSpec s;
  s.hx = -(RealMatrix::Ones(3, 3) - RealMatrix::Identity(3, 3));
  s.hprob = Eigen::Vector3d(0.0, 1.0, 2.0).asDiagonal();
  s.dbar_x = dbar_x;
  s.dbar_z = dbar_z;
  return s;
}

/// Two-level instance Hx = sx, Hp = sz.
inline MultiLevelSpec two_level_spec(double dbar_x, double dbar_z) {
  MultiLevelSpec s;
  s.hx = RealMatrix{{0.0, 1.0}, {1.0, 0.0}};
  s.hprob = RealMatrix{{1.0, 0.0}, {0.0, -1.0}};
  s.dbar_x = dbar_x;
  s.dbar_z = dbar_z;
  return s;
}

struct Eigenpairs {
  Eigen::VectorXd values;
  RealMatrix vectors;  // columns
};

namespace detail {

/// Column signs fixed so the first component above 1e-8 is positive.
inline void canonical_signs(RealMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > 1e-8) {
        if (v(r, c) < 0.0) v.col(c) *= -1.0;
        break;
      }
}

/// Column signs aligned with a reference basis.
inline void align_signs(RealMatrix& v, const RealMatrix& ref) {
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    if (v.col(c).dot(ref.col(c)) < 0.0) v.col(c) *= -1.0;
}

inline bool has_degeneracy(const Eigen::VectorXd& e, double tol) {
  for (Eigen::Index i = 0; i + 1 < e.size(); ++i)
    if (e(i + 1) - e(i) < tol) return true;
  return false;
}

}  // namespace detail

/// Eigenpairs of H at schedule value u. Degenerate levels are resolved by the
/// basis at u + probe so that eigenvectors continue smoothly into the interior.
inline Eigenpairs eigenpairs(const MultiLevelSpec& s, double u, double probe = 1e-6) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.hamiltonian(u));
  if (es.info() != Eigen::Success) throw NumericalError("multilevel", "eigenpairs", "eigensolver failed");
  Eigenpairs p{es.eigenvalues(), es.eigenvectors()};
  const double scale = std::max(1.0, p.values.cwiseAbs().maxCoeff());
  if (detail::has_degeneracy(p.values, 1e-9 * scale) && probe != 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> shifted(s.hamiltonian(u + probe));
    // Project the shifted basis onto the exact eigenspaces and re-orthonormalize.
    RealMatrix v = shifted.eigenvectors();
    RealMatrix proj = RealMatrix::Zero(v.rows(), v.rows());
    for (Eigen::Index i = 0; i < p.values.size();) {
      Eigen::Index j = i + 1;
      while (j < p.values.size() && p.values(j) - p.values(i) < 1e-9 * scale) ++j;
      const RealMatrix block = p.vectors.middleCols(i, j - i);
      proj.middleCols(i, j - i) = block * (block.transpose() * v.middleCols(i, j - i));
      i = j;
    }
    Eigen::HouseholderQR<RealMatrix> qr(proj);
    RealMatrix q = qr.householderQ() * RealMatrix::Identity(v.rows(), v.cols());
    detail::align_signs(q, proj);
    p.vectors = q;
  }
  return p;
}

struct SpectrumSchedule {
  std::vector<double> taus;
  std::vector<Eigen::VectorXd> eigenvalues;
  std::vector<RealMatrix> eigenvectors;

  std::vector<double> gap() const {
    std::vector<double> g;
    for (const auto& e : eigenvalues) g.push_back(e(1) - e(0));
    return g;
  }
};

/// Spectrum on the grid (refined where successive eigenvectors overlap by less
/// than 0.9), with eigenvector signs continued from tau = grid.front().
inline SpectrumSchedule gap_schedule(const MultiLevelSpec& s, const std::vector<double>& grid,
                                     int max_refinements = 30) {
  s.validate();
  if (grid.size() < 2) throw InvalidArgument("grid", "need at least two points");
  SpectrumSchedule out;
  auto push = [&](double t, Eigenpairs&& p) {
    out.taus.push_back(t);
    out.eigenvalues.push_back(std::move(p.values));
    out.eigenvectors.push_back(std::move(p.vectors));
  };
  Eigenpairs first = eigenpairs(s, grid.front());
  if (first.values(1) - first.values(0) < 1e-10)
    throw NumericalError("multilevel", "gap_schedule",
                         "ground/first-excited near-degeneracy at tau=" + std::to_string(grid.front()));
  detail::canonical_signs(first.vectors);
  push(grid.front(), std::move(first));

  const auto continuous = [](const RealMatrix& a, const RealMatrix& b) {
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (std::abs(a.col(c).dot(b.col(c))) <= 0.9) return false;
    return true;
  };

  for (std::size_t j = 1; j < grid.size(); ++j) {
    // Walk from the last accepted point to grid[j], halving the step where needed.
    double target = grid[j];
    int depth = 0;
    while (out.taus.back() < target) {
      double t = target;
      Eigenpairs p = eigenpairs(s, t);
      while (!continuous(out.eigenvectors.back(), p.vectors)) {
        if (++depth > max_refinements)
          throw NumericalError("multilevel", "gap_schedule",
                               "eigenvector continuity lost near tau=" + std::to_string(t));
        t = 0.5 * (out.taus.back() + t);
        p = eigenpairs(s, t);
      }
      detail::align_signs(p.vectors, out.eigenvectors.back());
      if (p.values(1) - p.values(0) < 1e-10)
        throw NumericalError("multilevel", "gap_schedule",
                             "ground/first-excited near-degeneracy at tau=" + std::to_string(t));
      push(t, std::move(p));
    }
  }
  return out;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    g[j] = j == intervals ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(intervals);
  return g;
}

/// Both schedule values u with dx^2 (1-u)^2 + dz^2 u^2 = f^2.
inline std::pair<double, double> control_from_gap(double f, double dx, double dz) {
  const double s2 = dx * dx + dz * dz;
  const double disc = dx * dx * dx * dx - s2 * (dx * dx - f * f);
  if (disc < 0.0) {
    // tolerate round-off at the minimum gap
    if (disc > -1e-12 * dx * dx * dx * dx) return {dx * dx / s2, dx * dx / s2};
    throw InvalidArgument("f", "requested gap is below the minimum achievable gap dx dz / sqrt(dx^2 + dz^2)");
  }
  const double r = std::sqrt(disc);
  return {(dx * dx - r) / s2, (dx * dx + r) / s2};
}

/// Ground/first-excited gap model on [0, 1] with eigenvectors tracked from a
/// dense schedule so that arbitrary-time queries keep a continuous gauge.
class GapModel {
 public:
  GapModel(MultiLevelSpec spec, std::size_t intervals = 2000)
      : spec_(std::move(spec)), schedule_(gap_schedule(spec_, uniform_grid(0.0, 1.0, intervals))) {
    phase_ = std::make_shared<const PhaseTable>([this](double t) { return gap(t); }, 0.0, 1.0, 10001);
  }

  GapModel(const GapModel&) = delete;
  GapModel& operator=(const GapModel&) = delete;

  const MultiLevelSpec& spec() const { return spec_; }
  const SpectrumSchedule& schedule() const { return schedule_; }

  /// Eigenpairs of the bare Hamiltonian at tau, signs continued from the schedule.
  Eigenpairs frame(double tau) const {
    Eigenpairs p = eigenpairs(spec_, tau, tau < 1.0 ? 1e-6 : -1e-6);
    detail::align_signs(p.vectors, schedule_.eigenvectors[nearest(tau)]);
    return p;
  }

  double gap(double tau) const {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(spec_.hamiltonian(tau), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(1) - es.eigenvalues()(0);
  }

  double level(double tau, Eigen::Index m) const {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(spec_.hamiltonian(tau), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(m);
  }

  /// f1 = <E1|(-dbar_x Hx + dbar_z Hp)|E0>.
  double f1(double tau) const {
    const Eigenpairs p = frame(tau);
    return p.vectors.col(1).dot(spec_.control_operator() * p.vectors.col(0));
  }

  /// int_0^tau gap
  double gap_phase(double tau) const { return phase_->antiderivative(tau); }

  /// Crossing time: location of the minimum gap (golden-section refined).
  double crossing_time() const {
    const auto g = schedule_.gap();
    const auto it = std::min_element(g.begin(), g.end());
    const auto j = static_cast<std::size_t>(it - g.begin());
    double a = schedule_.taus[j == 0 ? 0 : j - 1];
    double b = schedule_.taus[std::min(j + 1, g.size() - 1)];
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 100 && b - a > 1e-12; ++i) {
      const double c = b - r * (b - a);
      const double d = a + r * (b - a);
      if (gap(c) < gap(d)) b = d;
      else a = c;
    }
    return 0.5 * (a + b);
  }

  /// D from (gap/2)^2 ~ g^2 + a (tau - tau_r)^2 near the minimum: D = pi g^2 / (4 sqrt a).
  double imaginary_action(double tau_r) const {
    const double h = 1e-3;
    const auto e2 = [this](double t) {
      const double e = 0.5 * gap(t);
      return e * e;
    };
    const double g2 = e2(tau_r);
    const double a = (e2(tau_r + h) - 2.0 * g2 + e2(tau_r - h)) / (2.0 * h * h);
    if (!(a > 0.0)) throw NumericalError("multilevel", "imaginary_action", "gap minimum is not quadratic");
    return std::numbers::pi * g2 / (4.0 * std::sqrt(a));
  }

  /// First sign change of f1 on the schedule, if any.
  std::optional<double> f1_zero_crossing() const {
    const RealMatrix b = spec_.control_operator();
    double prev = 0.0;
    for (std::size_t j = 0; j < schedule_.taus.size(); ++j) {
      const auto& v = schedule_.eigenvectors[j];
      const double f = v.col(1).dot(b * v.col(0));
      if (j > 0 && (f == 0.0 || (f > 0.0) != (prev > 0.0))) return schedule_.taus[j];
      prev = f;
    }
    return std::nullopt;
  }

 private:
  std::size_t nearest(double tau) const {
    const auto& t = schedule_.taus;
    const auto it = std::lower_bound(t.begin(), t.end(), tau);
    if (it == t.begin()) return 0;
    if (it == t.end()) return t.size() - 1;
    const auto j = static_cast<std::size_t>(it - t.begin());
    return (tau - t[j - 1] < t[j] - tau) ? j - 1 : j;
  }

  MultiLevelSpec spec_;
  SpectrumSchedule schedule_;
  std::shared_ptr<const PhaseTable> phase_;
};

/// c(s) = -alpha / (f1(s) gap(s)^2) sin(int_{tau_r}^s gap + xi).
inline std::function<double(double)> multilevel_resonance_control(const std::shared_ptr<const GapModel>& model,
                                                                  double tau_r, double alpha, double xi) {
  if (alpha == 0.0) return [](double) { return 0.0; };
  if (const auto z = model->f1_zero_crossing())
    throw NumericalError("multilevel", "multilevel_resonance_control",
                         "f1 changes sign near tau=" + std::to_string(*z) + "; control would be singular");
  const double ref = model->gap_phase(tau_r);
  return [model, ref, alpha, xi](double s) {
    const double g = model->gap(s);
    return -alpha / (model->f1(s) * g * g) * std::sin(model->gap_phase(s) - ref + xi);
  };
}

/// One step of the order-4 Magnus integrator for a real symmetric H(tau).
inline ComplexVector magnus4_step_n(const std::function<RealMatrix(double)>& h_of, double tau, double h,
                                    const ComplexVector& psi) {
  static const double kOff = std::sqrt(3.0) / 6.0;
  const RealMatrix h1 = h_of(tau + (0.5 - kOff) * h);
  const RealMatrix h2 = h_of(tau + (0.5 + kOff) * h);
  if (!h1.allFinite() || !h2.allFinite())
    throw NumericalError("multilevel", "propagate", "non-finite Hamiltonian near tau=" + std::to_string(tau));
  // Omega = -i K, K = h/2 (H1 + H2) - i sqrt(3)/12 h^2 [H2, H1]
  const RealMatrix comm = h2 * h1 - h1 * h2;
  const ComplexMatrix k =
      (0.5 * h) * (h1 + h2).cast<cplx>() - cplx{0.0, std::sqrt(3.0) / 12.0 * h * h} * comm.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(k);
  const Eigen::VectorXd w = es.eigenvalues();
  ComplexVector phase(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::polar(1.0, -w(i));
  return es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * psi);
}

struct LevelPopulations {
  ComplexVector final_state;
  /// |<E_m(1)|psi(1)>|^2 in the eigenbasis of the controlled Hamiltonian at tau = 1.
  Eigen::VectorXd populations;
  /// <E_1(1)|psi(1)> in the tracked gauge.
  cplx first_excited_amplitude{};
  double norm_drift = 0.0;
};

/// Propagate from the ground state at tau = 0 to tau = 1 under u = tau + c(tau).
inline LevelPopulations propagate_multilevel(const GapModel& model, const std::function<double(double)>& c,
                                             double energy_factor = 0.1, double max_step = 0.01) {
  const MultiLevelSpec& s = model.spec();
  const auto h_of = [&](double t) { return s.hamiltonian(t + c(t)); };
  const auto controlled_frame = [&](double t) {
    Eigenpairs p = eigenpairs(s, t + c(t), t < 1.0 ? 1e-6 : -1e-6);
    detail::align_signs(p.vectors, model.frame(t).vectors);
    return p;
  };
  const Eigenpairs f0 = controlled_frame(0.0);
  ComplexVector psi = f0.vectors.col(0).cast<cplx>();
  double tau = 0.0;
  while (tau < 1.0) {
    const double radius = h_of(tau).cwiseAbs().rowwise().sum().maxCoeff();
    double h = std::min(max_step, energy_factor / std::max(radius, 1e-12));
    if (tau + h > 1.0) h = 1.0 - tau;
    psi = magnus4_step_n(h_of, tau, h, psi);
    tau = tau + h >= 1.0 ? 1.0 : tau + h;
  }
  const Eigenpairs f1 = controlled_frame(1.0);
  LevelPopulations out;
  out.final_state = psi;
  out.norm_drift = std::abs(psi.norm() - 1.0);
  const ComplexVector proj = f1.vectors.cast<cplx>().adjoint() * psi;
  out.populations = proj.cwiseAbs2();
  out.first_excited_amplitude = proj(1);
  return out;
}

enum class MultiFreeSource { wkb, propagated };

struct SuppressionReport {
  double tau_r = 0.0;
  double action = 0.0;
  double alpha = 0.0;
  double xi = 0.0;
  cplx free_amplitude{};
  /// free - 1/2 phase e^{-i xi} alpha int gap^{-2}
  cplx perturbative_amplitude{};
  double p01_free = 0.0;
  double p01_controlled = 0.0;
  /// Total population above the first excited level.
  double p0m_free = 0.0;
  double p0m_controlled = 0.0;
};

/// e^{-i int_{tau_r}^1 E1} e^{-i int_0^{tau_r} E0}
inline cplx multilevel_crossing_phase(const GapModel& m, double tau_r) {
  const double a = integrate([&m](double t) { return m.level(t, 0); }, 0.0, tau_r);
  const double b = integrate([&m](double t) { return m.level(t, 1); }, tau_r, 1.0);
  return std::polar(1.0, -(a + b));
}

inline double inverse_gap_integral(const GapModel& m) {
  return integrate(
      [&m](double t) {
        const double g = m.gap(t);
        return 1.0 / (g * g);
      },
      0.0, 1.0);
}

/// Free amplitude <E1(1)|U|E0(0)>: adiabatic-impulse estimate or direct propagation.
inline cplx multilevel_free_amplitude(const GapModel& m, double tau_r, double action, MultiFreeSource src) {
  if (src == MultiFreeSource::propagated)
    return propagate_multilevel(m, [](double) { return 0.0; }).first_excited_amplitude;
  return multilevel_crossing_phase(m, tau_r) * std::exp(-2.0 * action);
}

/// Tuned (alpha, xi) cancelling the free amplitude at first order, the
/// perturbative amplitude, and the numerical populations with and without the
/// control.
inline SuppressionReport first_excited_amplitude(const std::shared_ptr<const GapModel>& model,
                                                 MultiFreeSource src = MultiFreeSource::propagated,
                                                 std::optional<std::pair<double, double>> alpha_xi = {}) {
  SuppressionReport r;
  r.tau_r = model->crossing_time();
  r.action = model->imaginary_action(r.tau_r);
  r.free_amplitude = multilevel_free_amplitude(*model, r.tau_r, r.action, src);
  const cplx phase = multilevel_crossing_phase(*model, r.tau_r);
  const double inv = inverse_gap_integral(*model);
  if (alpha_xi) {
    r.alpha = alpha_xi->first;
    r.xi = alpha_xi->second;
  } else {
    const cplx v = 2.0 * r.free_amplitude * std::conj(phase) / inv;  // alpha e^{-i xi}
    r.alpha = std::abs(v);
    r.xi = -std::arg(v);
  }
  r.perturbative_amplitude = r.free_amplitude - 0.5 * phase * std::polar(r.alpha, -r.xi) * inv;

  const LevelPopulations free = propagate_multilevel(*model, [](double) { return 0.0; });
  const LevelPopulations ctl = propagate_multilevel(*model, multilevel_resonance_control(model, r.tau_r, r.alpha, r.xi));
  r.p01_free = free.populations(1);
  r.p01_controlled = ctl.populations(1);
  r.p0m_free = free.populations.tail(free.populations.size() - 2).sum();
  r.p0m_controlled = ctl.populations.tail(ctl.populations.size() - 2).sum();
  return r;
}

/// Amplitude of the multilevel control equivalent to a two-level annealing
/// amplitude: alpha_ml = 4 dbar_x dbar_z alpha_anneal (Hx = sx, Hp = sz).
inline double two_level_alpha_mapping(double alpha_anneal, double dbar_x, double dbar_z) {
  return 4.0 * dbar_x * dbar_z * alpha_anneal;
}

}  // namespace tdres
