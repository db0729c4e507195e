#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tdres/anneal.hpp"
#include "tdres/multilevel.hpp"

using namespace tdres;

namespace {

// Real roots of det(lambda - A) from Faddeev-LeVerrier coefficients and
// bisection on sign changes, in long double.
std::vector<double> charpoly_roots(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LMat al = a.cast<long double>();
  std::vector<long double> c(static_cast<std::size_t>(n + 1));
  c[static_cast<std::size_t>(n)] = 1.0L;
  LMat m = LMat::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = al * m + c[static_cast<std::size_t>(n - k + 1)] * LMat::Identity(n, n);
    c[static_cast<std::size_t>(n - k)] = -(al * m).trace() / static_cast<long double>(k);
  }
  const auto p = [&](long double x) {
    long double v = 0.0L;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
  };
  const long double r = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  std::vector<double> roots;
  const int cells = 200000;
  long double x0 = -r;
  long double p0 = p(x0);
  for (int i = 1; i <= cells; ++i) {
    long double x1 = -r + 2.0L * r * i / cells;
    const long double p1 = p(x1);
    if (p0 == 0.0L) roots.push_back(static_cast<double>(x0));
    else if ((p0 < 0.0L) != (p1 < 0.0L)) {
      long double lo = x0;
      long double hi = x1;
      long double plo = p0;
      for (int it = 0; it < 200 && hi - lo > 1e-18L; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double pm = p(mid);
        if ((pm < 0.0L) == (plo < 0.0L)) {
          lo = mid;
          plo = pm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(static_cast<double>(0.5L * (lo + hi)));
    }
    x0 = x1;
    p0 = p1;
  }
  return roots;
}

RealMatrix random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> nd;
  RealMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = nd(gen);
  return m;
}

std::shared_ptr<const GapModel> model(MultiLevelSpec s) { return std::make_shared<const GapModel>(std::move(s)); }

}  // namespace

TEST(GapSchedule, TwoLevelGapIsTwiceEnergy) {
  const MultiLevelSpec s = two_level_spec(10.0, 20.0);
  const AnnealSpec a{1, 10.0, 20.0};
  const auto grid = uniform_grid(0.0, 1.0, 200);
  const SpectrumSchedule sch = gap_schedule(s, grid);
  const auto g = sch.gap();
  for (std::size_t j = 0; j < sch.taus.size(); ++j) EXPECT_NEAR(g[j], 2.0 * anneal_energy(sch.taus[j], a), 1e-12);
}

TEST(GapSchedule, InitialGapFromTransverseTermAlone) {
  const MultiLevelSpec s = reference_three_level(8.0, 5.0);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(8.0 * s.hx);
  const SpectrumSchedule sch = gap_schedule(s, uniform_grid(0.0, 1.0, 10));
  EXPECT_NEAR(sch.gap().front(), es.eigenvalues()(1) - es.eigenvalues()(0), 1e-12);
}

TEST(GapSchedule, RandomSpectrumMatchesCharacteristicPolynomial) {
  auto gen = tdres::testing::rng(99);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    MultiLevelSpec s;
    s.hx = random_symmetric(gen, 4);
    s.hprob = random_symmetric(gen, 4);
    s.dbar_x = 1.0 + 2.0 * ud(gen);
    s.dbar_z = 1.0 + 2.0 * ud(gen);
    const double t = ud(gen);
    const Eigenpairs p = eigenpairs(s, t);
    const auto roots = charpoly_roots(s.hamiltonian(t));
    ASSERT_EQ(roots.size(), 4u) << "trial " << trial;
    for (Eigen::Index i = 0; i < 4; ++i) {
      if (i > 0) EXPECT_LE(p.values(i - 1), p.values(i));
      EXPECT_NEAR(p.values(i), roots[static_cast<std::size_t>(i)], 1e-10) << "trial " << trial << " level " << i;
    }
  }
}

TEST(GapSchedule, EigenvectorsContinuous) {
  const SpectrumSchedule sch = gap_schedule(reference_three_level(), uniform_grid(0.0, 1.0, 400));
  for (std::size_t j = 1; j < sch.taus.size(); ++j)
    for (Eigen::Index c = 0; c < 3; ++c)
      ASSERT_GT(sch.eigenvectors[j].col(c).dot(sch.eigenvectors[j - 1].col(c)), 0.9) << j << "," << c;
}

TEST(GapSchedule, DegenerateGroundStateThrows) {
  MultiLevelSpec s = reference_three_level();
  s.hx = RealMatrix::Ones(3, 3) - RealMatrix::Identity(3, 3);
  EXPECT_THROW(gap_schedule(s, uniform_grid(0.0, 1.0, 10)), NumericalError);
  EXPECT_THROW(GapModel{s}, NumericalError);
}

TEST(MultiLevelSpec, HamiltonianSymmetricAndValidated) {
  const MultiLevelSpec s = reference_three_level();
  for (double u : {0.0, 0.3, 1.0}) EXPECT_EQ((s.hamiltonian(u) - s.hamiltonian(u).transpose()).norm(), 0.0);
  MultiLevelSpec bad = s;
  bad.hprob(0, 1) = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(ControlFromGap, Branches) {
  const double dx = 3.0;
  const double dz = 4.0;
  const double s2 = dx * dx + dz * dz;
  auto [lo, hi] = control_from_gap(dx, dx, dz);
  EXPECT_NEAR(lo, 0.0, 1e-15);
  EXPECT_NEAR(hi, 2.0 * dx * dx / s2, 1e-15);
  std::tie(lo, hi) = control_from_gap(dx * dz / std::sqrt(s2), dx, dz);
  EXPECT_NEAR(lo, dx * dx / s2, 1e-7);
  EXPECT_NEAR(hi, dx * dx / s2, 1e-7);
  std::tie(lo, hi) = control_from_gap(dz, dx, dz);
  EXPECT_NEAR(hi, 1.0, 1e-15);
  EXPECT_THROW(control_from_gap(1.0, dx, dz), InvalidArgument);
}

TEST(ResonanceControl, ZeroAmplitudeIsZero) {
  const auto m = model(reference_three_level());
  const auto c = multilevel_resonance_control(m, m->crossing_time(), 0.0, 0.3);
  for (double t : {0.0, 0.5, 1.0}) EXPECT_EQ(c(t), 0.0);
}

TEST(ResonanceControl, DriveFrequencyIsGap) {
  const auto m = model(reference_three_level());
  auto gen = tdres::testing::rng(5);
  std::uniform_real_distribution<double> ud(0.01, 0.99);
  const double h = 1e-4;
  for (int i = 0; i < 50; ++i) {
    const double t = ud(gen);
    const auto f = [&](double x) { return m->gap_phase(x); };
    const double rate = (f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h);
    ASSERT_NEAR(rate, m->gap(t), 1e-7) << t;
  }
}

TEST(TwoLevelReduction, CouplingAndControl) {
  const double dx = 10.0;
  const double dz = 15.0;
  const auto m = model(two_level_spec(dx, dz));
  const AnnealSpec a{1, dx, dz};
  for (double t : {0.0, 0.2, 0.5, 0.8, 1.0}) EXPECT_NEAR(std::abs(m->f1(t)), dx * dz / anneal_energy(t, a), 1e-10);

  const StokesGeometry g = anneal_geometry(a);
  const double tr = m->crossing_time();
  EXPECT_NEAR(tr, g.crossings[0], 1e-6);
  const double alpha = 0.02;
  const double xi = 0.4;
  const ControlFunction ca = anneal_control(a, {{alpha, xi}}, g);
  const auto cm = multilevel_resonance_control(m, tr, two_level_alpha_mapping(alpha, dx, dz), xi);
  const double sign = m->f1(0.5) > 0.0 ? 1.0 : -1.0;
  for (double t : {0.05, 0.3, 0.4, 0.6, 0.95})
    EXPECT_NEAR(sign * cm(t), anneal_coefficient(ca, a, t), 1e-6 * alpha) << t;
}

TEST(TwoLevelReduction, SuppressionMatchesAnneal) {
  const double dx = 10.0;
  const double dz = 20.0;
  const auto m = model(two_level_spec(dx, dz));
  const AnnealSpec a{1, dx, dz};
  const StokesGeometry g = anneal_geometry(a);
  const SuppressionReport r = first_excited_amplitude(m, MultiFreeSource::propagated);
  const cplx free = anneal_free_amplitude(a, g, FreeAmplitudeSource::propagated);
  EXPECT_NEAR(r.p01_free, std::norm(free), 1e-8);
  const double tuned = tune_complex_amplitudes(a, g, FreeAmplitudeSource::propagated)[0].alpha_tilde;
  EXPECT_NEAR(r.alpha / two_level_alpha_mapping(tuned, dx, dz), 1.0, 1e-6);
  // the controlled runs agree too
  const double controlled = std::norm(anneal_propagated_amplitude(
      a, anneal_control(a, tune_complex_amplitudes(a, g, FreeAmplitudeSource::propagated), g)));
  EXPECT_NEAR(r.p01_controlled, controlled, 1e-6 * std::max(controlled, 1e-3));
}

TEST(FirstExcited, TunedPerturbativeAmplitudeVanishes) {
  for (auto src : {MultiFreeSource::wkb, MultiFreeSource::propagated}) {
    const SuppressionReport r = first_excited_amplitude(model(reference_three_level()), src);
    EXPECT_LT(std::abs(r.perturbative_amplitude), 1e-14);
  }
}

TEST(FirstExcited, PropagationPreservesNorm) {
  const auto m = model(reference_three_level());
  const auto c = multilevel_resonance_control(m, m->crossing_time(), 0.5, 0.1);
  EXPECT_LE(propagate_multilevel(*m, c).norm_drift, 1e-8);
  EXPECT_LE(propagate_multilevel(*m, [](double) { return 0.0; }).norm_drift, 1e-8);
}

TEST(FirstExcited, ReferenceFixtureSuppression) {
  const SuppressionReport r = first_excited_amplitude(model(reference_three_level()));
  EXPECT_GE(r.p01_free / r.p01_controlled, 5.0) << r.p01_free << " -> " << r.p01_controlled;
  const double change = std::max(r.p0m_controlled / r.p0m_free, r.p0m_free / r.p0m_controlled);
  EXPECT_LT(change, 2.0) << r.p0m_free << " -> " << r.p0m_controlled;
}
