#ifndef OMNIBUS_MODEL_FIT_HPP
#define OMNIBUS_MODEL_FIT_HPP

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "omnibus/errors.hpp"

namespace omnibus {

/// Sufficient statistics of a fitted linear regression: everything the
/// omnibus tests need.
struct RegressionSummary {
  std::int64_t n_obs = 0;        // N
  std::int64_t n_predictors = 0; // K, excluding the intercept
  double r_squared = 0.0;
  double f_stat = 0.0;           // +inf sentinel when r_squared == 1
  bool perfect_fit = false;

  void validate() const {
    if (n_predictors < 1) throw std::invalid_argument("RegressionSummary: K must be >= 1");
    if (n_obs <= n_predictors + 1) {
      throw std::invalid_argument("RegressionSummary: requires N > K + 1");
    }
    if (!(r_squared >= 0.0) || !(r_squared <= 1.0)) {
      throw std::invalid_argument("RegressionSummary: R^2 outside [0,1]");
    }
  }
};

/// Builds a RegressionSummary from (N, K, R^2), deriving the F statistic.
inline RegressionSummary regression_summary_from_r2(std::int64_t n_obs,
                                                    std::int64_t n_predictors,
                                                    double r_squared) {
  RegressionSummary s;
  s.n_obs = n_obs;
  s.n_predictors = n_predictors;
  s.r_squared = r_squared;
  s.validate();
  const double dfd = static_cast<double>(n_obs - n_predictors - 1);
  if (r_squared == 1.0) {
    s.f_stat = std::numeric_limits<double>::infinity();
    s.perfect_fit = true;
  } else {
    s.f_stat = (r_squared / static_cast<double>(n_predictors)) /
               ((1.0 - r_squared) / dfd);
  }
  return s;
}

/// One group of a one-way layout, reduced to its sufficient statistics.
struct GroupSummary {
  std::int64_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1 denominator)
};

enum class WelchUnavailable { GroupTooSmall, ZeroVariance };

struct WelchStats {
  double f_prime = 0.0;
  double df_prime = 0.0;
};

/// One-way ANOVA statistics derived from group summaries.
struct AnovaSummary {
  std::vector<GroupSummary> groups;
  std::int64_t n_total = 0;
  double grand_mean = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  double f_stat = 0.0;  // +inf sentinel when ss_within == 0 and ss_between > 0
  double eta_sq_hat = 0.0;
  double epsilon_sq_hat = 0.0;
  double omega_sq_hat = 0.0;
  std::optional<WelchStats> welch;
  std::optional<WelchUnavailable> welch_unavailable_reason;
  bool perfect_fit = false;
  // epsilon/omega estimators are bias corrections and may be negative;
  // they are reported as-is with this flag set.
  bool negative_bias_corrected = false;

  std::int64_t n_groups() const { return static_cast<std::int64_t>(groups.size()); }
  double df_between() const { return static_cast<double>(n_groups() - 1); }
  double df_within() const { return static_cast<double>(n_total - n_groups()); }
};

namespace detail {

inline double kahan_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

}  // namespace detail

/// Reduces a raw data column to its group summary (two-pass mean/sd).
inline GroupSummary summarize_group(std::span<const double> values) {
  GroupSummary g;
  g.n = static_cast<std::int64_t>(values.size());
  if (g.n == 0) throw std::invalid_argument("summarize_group: empty group");
  g.mean = detail::kahan_sum(values) / static_cast<double>(g.n);
  if (g.n >= 2) {
    double ss = 0.0, c = 0.0;
    for (double v : values) {
      const double d = (v - g.mean) * (v - g.mean);
      const double t = ss + d;
      c += (ss - t) + d;
      ss = t;
    }
    g.sd = std::sqrt((ss + c) / static_cast<double>(g.n - 1));
  }
  return g;
}

/// Least-squares fit of y on X (intercept appended), returning the
/// sufficient statistics R^2 and F. Uses a rank-revealing Householder QR.
inline RegressionSummary fit_regression(const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& x) {
  const std::int64_t n = y.size();
  const std::int64_t k = x.cols();
  if (x.rows() != n) throw std::invalid_argument("fit_regression: y and X row counts differ");
  if (k < 1) throw std::invalid_argument("fit_regression: X must have at least one column");
  if (n <= k + 1) throw std::invalid_argument("fit_regression: requires N > K + 1");

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < k + 1) {
    throw RankDeficientDesign("fit_regression: design matrix is rank deficient");
  }

  const double ybar = y.mean();
  const Eigen::VectorXd centered = y.array() - ybar;
  const double ss_tot = centered.squaredNorm();

  const Eigen::VectorXd beta = qr.solve(y);
  const double ss_res = (y - design * beta).squaredNorm();

  RegressionSummary s;
  s.n_obs = n;
  s.n_predictors = k;
  if (ss_tot == 0.0) {
    // constant outcome: nothing to explain
    s.r_squared = 0.0;
    s.f_stat = 0.0;
    return s;
  }
  double r2 = 1.0 - ss_res / ss_tot;
  if (r2 < 0.0) r2 = 0.0;
  if (r2 > 1.0) r2 = 1.0;
  // treat residual variation at roundoff scale as a perfect fit
  if (ss_res <= 1e-24 * ss_tot) r2 = 1.0;
  s.r_squared = r2;
  if (r2 == 1.0) {
    s.f_stat = std::numeric_limits<double>::infinity();
    s.perfect_fit = true;
  } else {
    s.f_stat = (r2 / static_cast<double>(k)) /
               ((1.0 - r2) / static_cast<double>(n - k - 1));
  }
  return s;
}

/// Welch's heteroscedastic one-way F. Weights are w_j = n_j / s_j^2.
/// Throws when a group has fewer than two observations or zero variance.
inline WelchStats welch_f(std::span<const GroupSummary> groups) {
  const std::size_t j_groups = groups.size();
  if (j_groups < 2) throw std::invalid_argument("welch_f: needs at least 2 groups");
  double w_sum = 0.0;
  for (const auto& g : groups) {
    if (g.n < 2) throw std::invalid_argument("welch_f: every group needs n >= 2");
    if (!(g.sd > 0.0)) throw std::invalid_argument("welch_f: zero sample variance in a group");
    w_sum += static_cast<double>(g.n) / (g.sd * g.sd);
  }
  double y_w = 0.0;
  for (const auto& g : groups) {
    y_w += (static_cast<double>(g.n) / (g.sd * g.sd)) * g.mean / w_sum;
  }
  const double jd = static_cast<double>(j_groups);
  double numerator = 0.0;
  double spread = 0.0;  // sum (1 - w_j/W)^2 / (n_j - 1)
  for (const auto& g : groups) {
    const double w = static_cast<double>(g.n) / (g.sd * g.sd);
    numerator += w * (g.mean - y_w) * (g.mean - y_w);
    const double frac = 1.0 - w / w_sum;
    spread += frac * frac / static_cast<double>(g.n - 1);
  }
  numerator /= (jd - 1.0);
  const double denominator = 1.0 + 2.0 * (jd - 2.0) / (jd * jd - 1.0) * spread;

  WelchStats ws;
  ws.f_prime = numerator / denominator;
  ws.df_prime = (jd * jd - 1.0) / (3.0 * spread);
  return ws;
}

/// One-way ANOVA from group summaries: sums of squares, F, the eta/epsilon/
/// omega effect-size estimates and (when available) the Welch statistics.
inline AnovaSummary anova_from_summaries(std::span<const GroupSummary> groups) {
  if (groups.size() < 2) {
    throw std::invalid_argument("anova_from_summaries: needs at least 2 groups");
  }
  AnovaSummary a;
  a.groups.assign(groups.begin(), groups.end());
  for (const auto& g : groups) {
    if (g.n < 1) throw std::invalid_argument("anova_from_summaries: group with n < 1");
    if (g.sd < 0.0 || !std::isfinite(g.sd)) {
      throw std::invalid_argument("anova_from_summaries: invalid sd");
    }
    a.n_total += g.n;
  }
  const double n_total = static_cast<double>(a.n_total);
  if (a.n_total <= a.n_groups()) {
    throw std::invalid_argument("anova_from_summaries: requires N > J");
  }

  std::vector<double> weighted(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    weighted[i] = static_cast<double>(groups[i].n) * groups[i].mean;
  }
  a.grand_mean = detail::kahan_sum(weighted) / n_total;

  std::vector<double> between(groups.size()), within(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double dev = groups[i].mean - a.grand_mean;
    between[i] = static_cast<double>(groups[i].n) * dev * dev;
    within[i] = static_cast<double>(groups[i].n - 1) * groups[i].sd * groups[i].sd;
  }
  a.ss_between = detail::kahan_sum(between);
  a.ss_within = detail::kahan_sum(within);

  const double ss_total = a.ss_between + a.ss_within;
  const double ms_within = a.ss_within / a.df_within();
  const double ms_between = a.ss_between / a.df_between();

  if (a.ss_within == 0.0) {
    if (a.ss_between == 0.0) {
      a.f_stat = 0.0;
    } else {
      a.f_stat = std::numeric_limits<double>::infinity();
      a.perfect_fit = true;
    }
  } else {
    a.f_stat = ms_between / ms_within;
  }

  if (ss_total == 0.0) {
    a.eta_sq_hat = 0.0;
    a.epsilon_sq_hat = 0.0;
    a.omega_sq_hat = 0.0;
  } else {
    a.eta_sq_hat = a.ss_between / ss_total;
    const double bias_adjusted = a.ss_between - a.df_between() * ms_within;
    a.epsilon_sq_hat = bias_adjusted / ss_total;
    a.omega_sq_hat = bias_adjusted / (ss_total + ms_within);
    a.negative_bias_corrected = a.epsilon_sq_hat < 0.0 || a.omega_sq_hat < 0.0;
  }

  bool all_big_enough = true;
  bool all_positive_var = true;
  for (const auto& g : groups) {
    if (g.n < 2) all_big_enough = false;
    if (!(g.sd > 0.0)) all_positive_var = false;
  }
  if (!all_big_enough) {
    a.welch_unavailable_reason = WelchUnavailable::GroupTooSmall;
  } else if (!all_positive_var) {
    a.welch_unavailable_reason = WelchUnavailable::ZeroVariance;
  } else {
    a.welch = welch_f(groups);
  }
  return a;
}

/// ANOVA from raw data columns; reduces each group to its summary first.
inline AnovaSummary anova_from_data(const std::vector<std::vector<double>>& groups) {
  std::vector<GroupSummary> summaries;
  summaries.reserve(groups.size());
  for (const auto& g : groups) summaries.push_back(summarize_group(g));
  return anova_from_summaries(summaries);
}

}  // namespace omnibus

#endif  // OMNIBUS_MODEL_FIT_HPP
