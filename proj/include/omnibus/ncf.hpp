#ifndef OMNIBUS_NCF_HPP
#define OMNIBUS_NCF_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "omnibus/beta_inc.hpp"
#include "omnibus/errors.hpp"

namespace omnibus {

/// Parameters of a (possibly non-central) F distribution.
struct NcfParams {
  double df1 = 1.0;  // numerator degrees of freedom
  double df2 = 1.0;  // denominator degrees of freedom
  double ncp = 0.0;  // non-centrality parameter

  void validate() const {
    if (!(df1 > 0.0) || !std::isfinite(df1) || !(df2 > 0.0) ||
        !std::isfinite(df2)) {
      throw std::domain_error("NcfParams: degrees of freedom must be finite and > 0");
    }
    if (!(ncp >= 0.0) || !std::isfinite(ncp)) {
      throw std::domain_error("NcfParams: ncp must be finite and >= 0");
    }
  }
};

/// P-values smaller than this are flushed to zero by the reporting layer,
/// which sets an underflow flag instead of printing a denormal.
inline constexpr double kPValueUnderflow = 1e-300;

namespace detail {

inline constexpr double kLogTiny = -690.0;  // below exp() underflow

// log of the beta step term t(alpha) = x^alpha (1-x)^b * G(alpha+b) /
// (G(alpha+1) G(b)), which satisfies I_x(alpha,b) = I_x(alpha+1,b) + t(alpha).
inline double log_beta_step(double alpha, double b, double log_y,
                            double log_y1) {
  return alpha * log_y + b * log_y1 + std::lgamma(alpha + b) -
         std::lgamma(alpha + 1.0) - std::lgamma(b);
}

// CDF of the non-central F as a Poisson(ncp/2) mixture of regularized
// incomplete beta terms, summed outward from the modal Poisson index.
// Step terms are carried in log space while they underflow so the
// recurrences survive extreme tails.
inline double ncf_cdf_mixture(double y, double y1, double a0, double b,
                              double lambda) {
  const double log_y = std::log(y);
  const double log_y1 = std::log(y1);

  const long m = static_cast<long>(std::floor(lambda));
  const double lp_m =
      -lambda + (m > 0 ? m * std::log(lambda) : 0.0) - std::lgamma(m + 1.0);
  const double p_m = std::exp(lp_m);

  const double i_m = ibeta(a0 + m, b, y);
  const double lt_m = log_beta_step(a0 + m, b, log_y, log_y1);

  double sum = p_m * i_m;
  double poisson_cum = p_m;

  // Upward pass: j = m, m+1, ...
  {
    double p = p_m;
    double icur = i_m;
    double lt = lt_m;
    long j = m;
    const long max_iter = m + 200000;
    for (;;) {
      const double remaining = 1.0 - poisson_cum;
      if (remaining * icur <= 1e-17 * sum + 1e-320) break;
      if (j >= max_iter) {
        throw ConvergenceError("ncf_cdf: upward mixture sum did not converge");
      }
      const double alpha = a0 + j;
      const double t = lt > kLogTiny ? std::exp(lt) : 0.0;
      icur = std::max(0.0, icur - t);
      // ratio t(alpha+1)/t(alpha) = y * (alpha+b) / (alpha+1)
      lt += log_y + std::log((alpha + b) / (alpha + 1.0));
      ++j;
      p *= lambda / static_cast<double>(j);
      poisson_cum += p;
      sum += p * icur;
      // past the mode the Poisson tail is geometric: sum_{i>j} p_i
      // <= p_j * r / (1 - r) with r = lambda / (j+1)
      if (static_cast<double>(j + 1) > lambda) {
        const double r = lambda / static_cast<double>(j + 1);
        if (p * (r / (1.0 - r)) * icur <= 1e-17 * sum + 1e-320) break;
      }
    }
  }

  // Downward pass: j = m-1, ..., 0
  if (m > 0) {
    double p = p_m;
    double icur = i_m;
    double lt = lt_m;
    for (long j = m; j-- > 0;) {
      const double alpha = a0 + j;  // step index between j and j+1
      lt += std::log((alpha + 1.0) / y / (alpha + b));
      const double t = lt > kLogTiny ? std::exp(lt) : 0.0;
      icur = std::min(1.0, icur + t);
      p *= static_cast<double>(j + 1) / lambda;
      sum += p * icur;
      // everything below j is bounded by p * r/(1-r) with r = j/lambda
      const double r = static_cast<double>(j) / lambda;
      if (r < 1.0 && p * r / (1.0 - r) <= 1e-17 * sum + 1e-320) break;
    }
  }

  if (sum < 0.0) return 0.0;
  return sum > 1.0 ? 1.0 : sum;
}

}  // namespace detail

/// CDF of the non-central F distribution, P(F <= x).
inline double ncf_cdf(double x, const NcfParams& params) {
  params.validate();
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("ncf_cdf: x must be >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;

  const double d1x = params.df1 * x;
  const double y = d1x / (d1x + params.df2);
  const double y1 = params.df2 / (d1x + params.df2);
  const double a0 = 0.5 * params.df1;
  const double b = 0.5 * params.df2;

  if (params.ncp == 0.0) return ibeta(a0, b, y);
  return detail::ncf_cdf_mixture(y, y1, a0, b, 0.5 * params.ncp);
}

/// Upper-tail probability P(F > x).
inline double ncf_sf(double x, const NcfParams& params) {
  return 1.0 - ncf_cdf(x, params);
}

/// Quantile of the non-central F distribution: the x with cdf(x) = p.
/// Bracketed bisection with secant refinement; monotonicity of the CDF
/// guarantees convergence.
inline double ncf_quantile(double p, const NcfParams& params) {
  params.validate();
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("ncf_quantile: p must be in (0,1)");
  }

  double lo = 0.0;
  double flo = -p;  // cdf(0) - p
  double hi = 1.0 + (params.df1 + params.ncp) / params.df1;
  double fhi = ncf_cdf(hi, params) - p;
  int expansions = 0;
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (++expansions > 200) {
      throw ConvergenceError("ncf_quantile: failed to bracket the root");
    }
    fhi = ncf_cdf(hi, params) - p;
  }

  for (int iter = 0; iter < 300; ++iter) {
    double mid;
    if (fhi != flo) {
      mid = hi - fhi * (hi - lo) / (fhi - flo);  // secant step
      const double margin = 0.01 * (hi - lo);
      if (!(mid > lo + margin) || !(mid < hi - margin)) {
        mid = 0.5 * (lo + hi);
      }
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double fmid = ncf_cdf(mid, params) - p;
    if (fmid == 0.0) return mid;
    if (fmid < 0.0) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
    if (hi - lo <= 1e-13 * std::max(hi, 1e-6)) break;
  }
  return 0.5 * (lo + hi);
}

/// Solves ncf_cdf(x; df1, df2, L) = target_p for the non-centrality L.
/// Returns 0 when even the central CDF does not exceed target_p, matching
/// the one-sided interval convention [0, L_u].
inline double invert_ncp(double x, double df1, double df2, double target_p) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("invert_ncp: x must be finite and > 0");
  }
  if (!(target_p > 0.0) || !(target_p < 1.0)) {
    throw std::domain_error("invert_ncp: target_p must be in (0,1)");
  }
  NcfParams params{df1, df2, 0.0};
  params.validate();

  double flo = ncf_cdf(x, params) - target_p;
  if (flo <= 0.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  params.ncp = hi;
  double fhi = ncf_cdf(x, params) - target_p;
  while (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (hi > 1e13) {
      throw ConvergenceError("invert_ncp: root not bracketed after expansion limit");
    }
    params.ncp = hi;
    fhi = ncf_cdf(x, params) - target_p;
  }

  for (int iter = 0; iter < 300; ++iter) {
    double mid;
    if (fhi != flo) {
      mid = hi - fhi * (hi - lo) / (fhi - flo);
      const double margin = 0.01 * (hi - lo);
      if (!(mid > lo + margin) || !(mid < hi - margin)) {
        mid = 0.5 * (lo + hi);
      }
    } else {
      mid = 0.5 * (lo + hi);
    }
    params.ncp = mid;
    const double fmid = ncf_cdf(x, params) - target_p;
    if (fmid == 0.0) return mid;
    if (fmid > 0.0) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
    if (hi - lo <= 1e-11 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace omnibus

#endif  // OMNIBUS_NCF_HPP
