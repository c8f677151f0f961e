// Test-side oracles, independent of the library's implementation paths.
#ifndef OMNIBUS_TESTS_ORACLES_HPP
#define OMNIBUS_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

// Regularized incomplete beta via the ascending power series
// I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * sum_n (a+b)_n / (a+1)_n x^n,
// with the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the far side.
// A different route than a continued fraction on purpose.
inline double ibeta_series(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > a / (a + b)) return 1.0 - ibeta_series(b, a, 1.0 - x);
  const double log_front = a * std::log(x) + b * std::log1p(-x) -
                           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200000; ++n) {
    term *= x * (a + b + n - 1.0) / (a + n);
    sum += term;
    if (term < 1e-17 * sum) {
      return std::exp(log_front) * sum / a;
    }
  }
  throw std::runtime_error("ibeta_series did not converge");
}

// Central F CDF through the incomplete-beta identity, on the series route.
inline double central_f_cdf(double x, double df1, double df2) {
  if (x <= 0.0) return 0.0;
  return ibeta_series(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2));
}

// Brute-force least squares via normal equations and Gaussian elimination
// (the explicit hat-matrix route). Small problems only.
struct LstsqFit {
  std::vector<double> beta;  // intercept first
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double r_squared = 0.0;
  double f_stat = 0.0;
};

inline LstsqFit lstsq_normal_equations(const std::vector<double>& y,
                                       const std::vector<std::vector<double>>& x_cols) {
  const std::size_t n = y.size();
  const std::size_t p = x_cols.size() + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(p, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c + 1 < p; ++c) a[i][c + 1] = x_cols[c][i];
  }
  // ata * beta = aty
  std::vector<std::vector<double>> m(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += a[i][r] * a[i][c];
      m[r][c] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i][r] * y[i];
    m[r][p] = s;
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    if (std::fabs(m[col][col]) < 1e-12) {
      throw std::runtime_error("lstsq oracle: singular normal equations");
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= p; ++c) m[r][c] -= f * m[col][c];
    }
  }
  LstsqFit fit;
  fit.beta.resize(p);
  for (std::size_t r = 0; r < p; ++r) fit.beta[r] = m[r][p] / m[r][r];

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pred = fit.beta[0];
    for (std::size_t c = 0; c + 1 < p; ++c) pred += fit.beta[c + 1] * x_cols[c][i];
    fit.ss_res += (y[i] - pred) * (y[i] - pred);
    fit.ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  fit.r_squared = fit.ss_tot > 0.0 ? 1.0 - fit.ss_res / fit.ss_tot : 0.0;
  const double k = static_cast<double>(p - 1);
  const double dfd = static_cast<double>(n) - k - 1.0;
  fit.f_stat = (fit.r_squared / k) / ((1.0 - fit.r_squared) / dfd);
  return fit;
}

// Pooled two-sample t (equal variances), for the J=2 ANOVA identity F = t^2.
inline double pooled_t_squared(std::int64_t n1, double m1, double s1,
                               std::int64_t n2, double m2, double s2) {
  const double sp2 = ((n1 - 1) * s1 * s1 + (n2 - 1) * s2 * s2) /
                     static_cast<double>(n1 + n2 - 2);
  const double t = (m1 - m2) / std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
  return t * t;
}

// Welch two-sample t^2 and the Welch-Satterthwaite degrees of freedom.
struct WelchT {
  double t_squared = 0.0;
  double df = 0.0;
};

inline WelchT welch_t(std::int64_t n1, double m1, double s1, std::int64_t n2,
                      double m2, double s2) {
  const double v1 = s1 * s1 / static_cast<double>(n1);
  const double v2 = s2 * s2 / static_cast<double>(n2);
  WelchT w;
  const double t = (m1 - m2) / std::sqrt(v1 + v2);
  w.t_squared = t * t;
  w.df = (v1 + v2) * (v1 + v2) /
         (v1 * v1 / static_cast<double>(n1 - 1) + v2 * v2 / static_cast<double>(n2 - 1));
  return w;
}

// Plain bisection for the quantile of a monotone CDF.
inline double bisect_quantile(const std::function<double(double)>& cdf, double p) {
  double lo = 0.0, hi = 1.0;
  while (cdf(hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("bisect_quantile: no bracket");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Monte Carlo draws of chi-square ratios for checking the non-central F
// CDF. Non-central chi-square via the Poisson-mixture representation.
class McSampler {
 public:
  explicit McSampler(std::uint64_t seed) : eng_(seed) {}

  double chi_sq(double df) {
    std::gamma_distribution<double> g(0.5 * df, 2.0);
    return g(eng_);
  }

  double noncentral_chi_sq(double df, double lambda) {
    double extra = 0.0;
    if (lambda > 0.0) {
      std::poisson_distribution<long> pois(0.5 * lambda);
      extra = 2.0 * static_cast<double>(pois(eng_));
    }
    return chi_sq(df + extra);
  }

  double ncf_draw(double df1, double df2, double ncp) {
    return (noncentral_chi_sq(df1, ncp) / df1) / (chi_sq(df2) / df2);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> d(mean, sd);
    return d(eng_);
  }

  double uniform() {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(eng_);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracles

#endif  // OMNIBUS_TESTS_ORACLES_HPP
