#ifndef OMNIBUS_INFERENCE_HPP
#define OMNIBUS_INFERENCE_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "omnibus/model_fit.hpp"
#include "omnibus/ncf.hpp"

namespace omnibus {

enum class TestKind {
  RegressionNhst,
  RegressionNonInf,
  AnovaNhst,
  AnovaNonInfHom,
  AnovaNonInfWelch,
};

inline const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::RegressionNhst: return "regression_nhst";
    case TestKind::RegressionNonInf: return "regression_noninf";
    case TestKind::AnovaNhst: return "anova_nhst";
    case TestKind::AnovaNonInfHom: return "anova_noninf_hom";
    case TestKind::AnovaNonInfWelch: return "anova_noninf_welch";
  }
  return "unknown";
}

/// Outcome of a single F-based test. `delta` is present exactly for the
/// non-inferiority kinds, and `ncp_used` is N*delta/(1-delta) for those.
struct TestResult {
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double ncp_used = 0.0;
  double p_value = 1.0;
  TestKind kind = TestKind::RegressionNhst;
  std::optional<double> delta;
  double alpha = 0.05;
  bool underflow = false;  // p below 1e-300 was flushed to zero
};

enum class DecisionLabel { Positive, Negative, Inconclusive };

inline const char* to_string(DecisionLabel l) {
  switch (l) {
    case DecisionLabel::Positive: return "positive";
    case DecisionLabel::Negative: return "negative";
    case DecisionLabel::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct DecisionOutcome {
  DecisionLabel label = DecisionLabel::Inconclusive;
  // both the NHST and the non-inferiority test rejected: a real effect of
  // negligible magnitude
  bool significant_yet_not_meaningful = false;
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0,1)");
  }
}

inline void check_delta(double delta) {
  // delta == 0 is not a usable margin; the plain NHST covers that question
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0,1), exclusive");
  }
}

inline double flush_underflow(double p, bool& flag) {
  if (p != 0.0 && p < kPValueUnderflow) {
    flag = true;
    return 0.0;
  }
  return p;
}

inline double noninf_ncp(double n_obs, double delta) {
  return n_obs * delta / (1.0 - delta);
}

}  // namespace detail

/// NHST for the regression effect: p = 1 - cdf(F; K, N-K-1, 0).
inline TestResult nhst_regression(const RegressionSummary& s, double alpha = 0.05) {
  s.validate();
  detail::check_alpha(alpha);
  TestResult r;
  r.kind = TestKind::RegressionNhst;
  r.statistic = s.f_stat;
  r.df1 = static_cast<double>(s.n_predictors);
  r.df2 = static_cast<double>(s.n_obs - s.n_predictors - 1);
  r.alpha = alpha;
  r.p_value = ncf_sf(s.f_stat, {r.df1, r.df2, 0.0});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

/// Non-inferiority test of H0: P^2 >= delta against H1: P^2 < delta,
/// p = cdf(F; K, N-K-1, N*delta/(1-delta)).
inline TestResult noninf_regression(const RegressionSummary& s, double delta,
                                    double alpha = 0.05) {
  s.validate();
  detail::check_delta(delta);
  detail::check_alpha(alpha);
  TestResult r;
  r.kind = TestKind::RegressionNonInf;
  r.statistic = s.f_stat;
  r.df1 = static_cast<double>(s.n_predictors);
  r.df2 = static_cast<double>(s.n_obs - s.n_predictors - 1);
  r.ncp_used = detail::noninf_ncp(static_cast<double>(s.n_obs), delta);
  r.delta = delta;
  r.alpha = alpha;
  r.p_value = ncf_cdf(s.f_stat, {r.df1, r.df2, r.ncp_used});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

/// ANOVA NHST, homogeneous variance: p = 1 - cdf(F; J-1, N-J, 0).
inline TestResult nhst_anova(const AnovaSummary& a, double alpha = 0.05) {
  detail::check_alpha(alpha);
  TestResult r;
  r.kind = TestKind::AnovaNhst;
  r.statistic = a.f_stat;
  r.df1 = a.df_between();
  r.df2 = a.df_within();
  r.alpha = alpha;
  r.p_value = ncf_sf(a.f_stat, {r.df1, r.df2, 0.0});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

/// ANOVA NHST on the Welch statistic: p = 1 - cdf(F'; J-1, df', 0).
inline TestResult nhst_anova_welch(const AnovaSummary& a, double alpha = 0.05) {
  detail::check_alpha(alpha);
  if (!a.welch) throw std::invalid_argument("nhst_anova_welch: Welch statistics unavailable");
  TestResult r;
  r.kind = TestKind::AnovaNhst;
  r.statistic = a.welch->f_prime;
  r.df1 = a.df_between();
  r.df2 = a.welch->df_prime;
  r.alpha = alpha;
  r.p_value = ncf_sf(r.statistic, {r.df1, r.df2, 0.0});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

/// Non-inferiority test of H0: eta^2 >= delta, homogeneous variance:
/// p = cdf(F; J-1, N-J, N*delta/(1-delta)).
inline TestResult noninf_anova_hom(const AnovaSummary& a, double delta,
                                   double alpha = 0.05) {
  detail::check_delta(delta);
  detail::check_alpha(alpha);
  TestResult r;
  r.kind = TestKind::AnovaNonInfHom;
  r.statistic = a.f_stat;
  r.df1 = a.df_between();
  r.df2 = a.df_within();
  r.ncp_used = detail::noninf_ncp(static_cast<double>(a.n_total), delta);
  r.delta = delta;
  r.alpha = alpha;
  r.p_value = ncf_cdf(a.f_stat, {r.df1, r.df2, r.ncp_used});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

/// Non-inferiority test of H0: eta^2' >= delta under heterogeneous
/// variance: p = cdf(F'; J-1, df', N*delta/(1-delta)).
inline TestResult noninf_anova_welch(const AnovaSummary& a, double delta,
                                     double alpha = 0.05) {
  detail::check_delta(delta);
  detail::check_alpha(alpha);
  if (!a.welch) {
    throw std::invalid_argument("noninf_anova_welch: Welch statistics unavailable");
  }
  TestResult r;
  r.kind = TestKind::AnovaNonInfWelch;
  r.statistic = a.welch->f_prime;
  r.df1 = a.df_between();
  r.df2 = a.welch->df_prime;
  r.ncp_used = detail::noninf_ncp(static_cast<double>(a.n_total), delta);
  r.delta = delta;
  r.alpha = alpha;
  r.p_value = ncf_cdf(r.statistic, {r.df1, r.df2, r.ncp_used});
  r.p_value = detail::flush_underflow(r.p_value, r.underflow);
  return r;
}

enum class PowerKind { Regression, Anova };

/// Analytic power of the non-inferiority test when the true effect is zero:
/// F* = quantile(alpha; df1, df2, N*delta/(1-delta)), power = cdf(F*; df1, df2, 0).
inline double power_noninf(std::int64_t n_obs, std::int64_t k_or_j,
                           double delta, double alpha, PowerKind kind) {
  detail::check_delta(delta);
  detail::check_alpha(alpha);
  double df1 = 0.0, df2 = 0.0;
  if (kind == PowerKind::Regression) {
    if (k_or_j < 1 || n_obs <= k_or_j + 1) {
      throw std::invalid_argument("power_noninf: requires K >= 1 and N > K + 1");
    }
    df1 = static_cast<double>(k_or_j);
    df2 = static_cast<double>(n_obs - k_or_j - 1);
  } else {
    if (k_or_j < 2 || n_obs <= k_or_j) {
      throw std::invalid_argument("power_noninf: requires J >= 2 and N > J");
    }
    df1 = static_cast<double>(k_or_j - 1);
    df2 = static_cast<double>(n_obs - k_or_j);
  }
  const double ncp = detail::noninf_ncp(static_cast<double>(n_obs), delta);
  const double f_star = ncf_quantile(alpha, {df1, df2, ncp});
  return ncf_cdf(f_star, {df1, df2, 0.0});
}

/// Upper limit of the one-sided (1-alpha) CI for eta^2, obtained by
/// pivoting the CDF over the non-centrality: eta^2_u = L_u / (L_u + N).
inline double eta_sq_upper_ci(double f_stat, double df1, double df2,
                              std::int64_t n_obs, double alpha) {
  detail::check_alpha(alpha);
  if (n_obs < 1) throw std::invalid_argument("eta_sq_upper_ci: N must be >= 1");
  if (f_stat == 0.0) return 0.0;
  if (std::isinf(f_stat)) return 1.0 - 1e-16;
  const double lambda_u = invert_ncp(f_stat, df1, df2, alpha);
  return lambda_u / (lambda_u + static_cast<double>(n_obs));
}

/// Conditional equivalence testing: NHST first, then the non-inferiority
/// test. Rejections use strict p < alpha.
inline DecisionOutcome cet_decide(double p_nhst, double p_noninf, double alpha) {
  detail::check_alpha(alpha);
  if (!(p_nhst >= 0.0) || !(p_nhst <= 1.0) || !(p_noninf >= 0.0) ||
      !(p_noninf <= 1.0)) {
    throw std::invalid_argument("cet_decide: p-values must be in [0,1]");
  }
  DecisionOutcome d;
  if (p_nhst < alpha) {
    d.label = DecisionLabel::Positive;
    d.significant_yet_not_meaningful = p_noninf < alpha;
  } else if (p_noninf < alpha) {
    d.label = DecisionLabel::Negative;
  } else {
    d.label = DecisionLabel::Inconclusive;
  }
  return d;
}

}  // namespace omnibus

#endif  // OMNIBUS_INFERENCE_HPP
