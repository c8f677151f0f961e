#ifndef OMNIBUS_BETA_INC_HPP
#define OMNIBUS_BETA_INC_HPP

#include <cmath>
#include <stdexcept>

#include "omnibus/errors.hpp"

namespace omnibus {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with
// the modified Lentz algorithm. Converges quickly for x < (a+1)/(a+b+2).
inline double ibeta_cf(double a, double b, double x) {
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 2000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;

  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;

  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw ConvergenceError("ibeta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1].
inline double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x)) {
    throw std::domain_error("ibeta: requires a > 0, b > 0, x in [0,1]");
  }
  if (x < 0.0 || x > 1.0) {
    throw std::domain_error("ibeta: x outside [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * detail::ibeta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

}  // namespace omnibus

#endif  // OMNIBUS_BETA_INC_HPP
