#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"

namespace tdres {

/// 1/Gamma(z) for complex z (Lanczos, g = 7), exactly zero at the poles.
inline cplx reciprocal_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) return {0.0, 0.0};
  if (z.real() < 0.5) {
    // 1/Gamma(z) = Gamma(1 - z) sin(pi z) / pi
    return std::sin(std::numbers::pi * z) / (std::numbers::pi * reciprocal_gamma(1.0 - z));
  }
  static constexpr std::array<double, 9> kCoef{0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
                                               771.32342877765313,   -176.61502916214059, 12.507343278686905,
                                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const cplx zz = z - 1.0;
  cplx x = kCoef[0];
  for (int i = 1; i < 9; ++i) x += kCoef[static_cast<std::size_t>(i)] / (zz + static_cast<double>(i));
  const cplx t = zz + 7.5;
  const cplx gamma = std::sqrt(2.0 * std::numbers::pi) * std::pow(t, zz + 0.5) * std::exp(-t) * x;
  return 1.0 / gamma;
}

/// Regularized confluent hypergeometric function 1F1(a; b; z) / Gamma(b).
/// At b = -m (m = 0, 1, ...) the limit a_{(m+1)} z^{m+1} 1F1~(a+m+1; m+2; z) is used.
inline cplx regularized_confluent_hypergeometric(cplx a, cplx b, cplx z, double rel_tol = 1e-12,
                                                 int max_terms = 10000) {
  if (b.imag() == 0.0 && b.real() <= 0.0 && b.real() == std::floor(b.real())) {
    const int m = static_cast<int>(-b.real());
    cplx pref{1.0, 0.0};
    for (int j = 0; j <= m; ++j) pref *= (a + static_cast<double>(j)) * z;
    return pref * regularized_confluent_hypergeometric(a + static_cast<double>(m + 1), static_cast<double>(m + 2),
                                                       z, rel_tol, max_terms);
  }
  cplx term = reciprocal_gamma(b);
  cplx sum = term;
  int small = 0;
  for (int k = 0; k < max_terms; ++k) {
    term *= (a + static_cast<double>(k)) * z / ((b + static_cast<double>(k)) * static_cast<double>(k + 1));
    sum += term;
    if (std::abs(term) <= rel_tol * std::abs(sum)) {
      if (++small >= 2 && k > std::abs(z)) return sum;
    } else {
      small = 0;
    }
    if (term == 0.0 && k > std::abs(z)) return sum;
  }
  throw NumericalError("resonance", "regularized_confluent_hypergeometric",
                       "series did not converge within the term cap (|z| too large)");
}

}  // namespace tdres
