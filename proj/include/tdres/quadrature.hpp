#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tdres/errors.hpp"

namespace tdres {

/// Adaptive Gauss-Kronrod integral of a real or complex integrand over [a, b].
/// Infinite limits are accepted.
template <class F>
auto integrate(F&& f, double a, double b, double tol = 1e-13, unsigned max_depth = 25) {
  double err = 0.0;
  auto r = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol, &err);
  if (!std::isfinite(std::abs(r)))
    throw NumericalError("quadrature", "integrate", "non-finite result");
  return r;
}

/// Fixed 20-point Gauss-Legendre rule on [a, b].
template <class F>
auto gauss20(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// Tabulated antiderivative Phi(tau) = int_a^tau rate(s) ds on a uniform grid,
/// interpolated by cubic Hermite splines that use the exact rate as slope.
/// Queries outside the grid fall back to direct quadrature.
class PhaseTable {
 public:
  PhaseTable() = default;

  PhaseTable(std::function<double(double)> rate, double a, double b, std::size_t nodes = 10001)
      : rate_(std::move(rate)), a_(a), b_(b) {
    if (!(a < b) || nodes < 2) throw InvalidArgument("phase_table", "empty interval");
    step_ = (b - a) / static_cast<double>(nodes - 1);
    values_.resize(nodes);
    slopes_.resize(nodes);
    values_[0] = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const double t = node(j);
      slopes_[j] = rate_(t);
      if (j > 0) values_[j] = values_[j - 1] + gauss20(rate_, node(j - 1), t);
    }
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  double rate(double tau) const { return rate_(tau); }

  /// int_a^tau rate(s) ds
  double antiderivative(double tau) const {
    if (tau < a_) return -integrate(rate_, tau, a_);
    if (tau > b_) return values_.back() + integrate(rate_, b_, tau);
    double x = (tau - a_) / step_;
    auto j = static_cast<std::size_t>(x);
    if (j >= values_.size() - 1) j = values_.size() - 2;
    const double t = x - static_cast<double>(j);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * values_[j] + h10 * step_ * slopes_[j] + h01 * values_[j + 1] + h11 * step_ * slopes_[j + 1];
  }

  /// int_from^to rate(s) ds
  double integral(double from, double to) const { return antiderivative(to) - antiderivative(from); }

 private:
  double node(std::size_t j) const {
    return j + 1 == values_.size() ? b_ : a_ + step_ * static_cast<double>(j);
  }

  std::function<double(double)> rate_;
  double a_ = 0.0;
  double b_ = 1.0;
  double step_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

}  // namespace tdres
