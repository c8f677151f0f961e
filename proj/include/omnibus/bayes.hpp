#ifndef OMNIBUS_BAYES_HPP
#define OMNIBUS_BAYES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "omnibus/errors.hpp"
#include "omnibus/inference.hpp"
#include "omnibus/model_fit.hpp"

namespace omnibus {

// Cauchy prior scale on the standardized effect size matching the
// BayesFactor R package's rscale = "medium" default for linear
// regression, i.e. sqrt(2)/4. The constant is pinned by calibration
// tests against that package's published output; change it only
// together with those tests.
inline constexpr double kRscaleMedium = 0.35355339059327373;

/// Default Bayes factor comparing the full regression model against the
/// intercept-only model.
struct BfResult {
  double bf10 = 1.0;      // may overflow to +inf for extreme evidence
  double log_bf10 = 0.0;  // finite whenever the integral converged
  double rscale = kRscaleMedium;
  double threshold = 3.0;
};

namespace detail {

// log integrand of the JZS Bayes factor on the t = g/(1+g) scale,
// including the Jacobian dg = dt/(1-t)^2. The mixing parameter g carries
// an inverse-gamma(1/2, N*rscale^2/2) law.
struct JzsLogIntegrand {
  double half_df_model;  // (N-K-1)/2
  double half_df_resid;  // (N-1)/2
  double one_minus_r2;
  double ig_scale;       // N*rscale^2/2
  double log_const;      // 0.5*log(ig_scale) - lgamma(0.5)

  double log_at_t(double t) const {
    if (t <= 0.0 || t >= 1.0) return -std::numeric_limits<double>::infinity();
    const double g = t / (1.0 - t);
    return log_const + half_df_model * std::log1p(g) -
           half_df_resid * std::log1p(g * one_minus_r2) - 1.5 * std::log(g) -
           ig_scale / g - 2.0 * std::log1p(-t);
  }

  // same quantity parameterized by u = log(g)
  double log_at_u(double u) const { return log_at_t(1.0 / (1.0 + std::exp(-u))); }
};

template <typename F>
double adaptive_simpson(const F& f, double a, double fa, double b, double fb,
                        double m, double fm, double whole, double tol,
                        int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol || b - m <= 1e-15 * std::max(1.0, std::fabs(m))) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    throw ConvergenceError("jzs_bf_regression: quadrature did not converge");
  }
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// JZS default Bayes factor BF10 from (R^2, N, K). The g integral is
/// evaluated in log space by deterministic adaptive quadrature after
/// mapping g = t/(1-t); the integrand peak is located first so panels
/// straddle it.
inline BfResult jzs_bf_regression(const RegressionSummary& s,
                                  double rscale = kRscaleMedium,
                                  double threshold = 3.0) {
  s.validate();
  if (!(rscale > 0.0)) throw std::invalid_argument("jzs_bf_regression: rscale must be > 0");
  if (!(threshold > 1.0)) throw std::invalid_argument("jzs_bf_regression: threshold must be > 1");
  if (s.r_squared >= 1.0) {
    throw std::domain_error("jzs_bf_regression: R^2 must be < 1");
  }

  const double n = static_cast<double>(s.n_obs);
  const double k = static_cast<double>(s.n_predictors);
  detail::JzsLogIntegrand logf;
  logf.half_df_model = 0.5 * (n - k - 1.0);
  logf.half_df_resid = 0.5 * (n - 1.0);
  logf.one_minus_r2 = 1.0 - s.r_squared;
  logf.ig_scale = 0.5 * n * rscale * rscale;
  logf.log_const = 0.5 * std::log(logf.ig_scale) - std::lgamma(0.5);

  // coarse scan over u = log(g), then golden-section refinement around
  // the best grid point
  constexpr int kScanPoints = 513;
  constexpr double kULo = -42.0;
  constexpr double kUHi = 42.0;
  const double du = (kUHi - kULo) / (kScanPoints - 1);
  double u_best = 0.0;
  double log_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScanPoints; ++i) {
    const double u = kULo + i * du;
    const double l = logf.log_at_u(u);
    if (l > log_max) {
      log_max = l;
      u_best = u;
    }
  }
  if (!std::isfinite(log_max)) {
    throw ConvergenceError("jzs_bf_regression: integrand peak not found");
  }
  {
    constexpr double kGolden = 0.6180339887498949;
    double lo = u_best - du, hi = u_best + du;
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = logf.log_at_u(x1);
    double f2 = logf.log_at_u(x2);
    for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = logf.log_at_u(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = logf.log_at_u(x1);
      }
    }
    const double refined = std::max(f1, f2);
    if (refined > log_max) {
      log_max = refined;
      u_best = f1 > f2 ? x1 : x2;
    }
  }

  const auto shifted = [&](double t) {
    const double l = logf.log_at_t(t);
    return std::isfinite(l) ? std::exp(l - log_max) : 0.0;
  };

  // panel edges concentrated around the peak (u offsets mapped through
  // the sigmoid back to t)
  static constexpr double kOffsets[] = {-50.0, -28.0, -14.0, -7.0, -3.5, -2.0,
                                        -1.0,  -0.5,  0.0,   0.5,  1.0,  2.0,
                                        3.5,   7.0,   14.0,  28.0, 50.0};
  std::vector<double> edges;
  edges.push_back(0.0);
  for (double off : kOffsets) {
    const double t = 1.0 / (1.0 + std::exp(-(u_best + off)));
    if (t > 1e-300 && t < 1.0 - 1e-13) edges.push_back(t);
  }
  edges.push_back(1.0 - 1e-13);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  struct Panel {
    double a, fa, b, fb, m, fm, whole;
  };
  std::vector<Panel> panels;
  panels.reserve(edges.size() - 1);
  double estimate = 0.0;
  double prev_t = edges.front();
  double prev_f = shifted(prev_t);
  for (std::size_t i = 1; i < edges.size(); ++i) {
    Panel p;
    p.a = prev_t;
    p.fa = prev_f;
    p.b = edges[i];
    p.fb = shifted(p.b);
    p.m = 0.5 * (p.a + p.b);
    p.fm = shifted(p.m);
    p.whole = (p.b - p.a) / 6.0 * (p.fa + 4.0 * p.fm + p.fb);
    estimate += p.whole;
    panels.push_back(p);
    prev_t = p.b;
    prev_f = p.fb;
  }

  const double tol =
      std::max(1e-12 * std::max(estimate, 1e-30), 1e-280) / panels.size();
  double integral = 0.0;
  for (const Panel& p : panels) {
    integral += detail::adaptive_simpson(shifted, p.a, p.fa, p.b, p.fb, p.m,
                                         p.fm, p.whole, tol, 60);
  }
  if (!(integral > 0.0) || !std::isfinite(integral)) {
    throw ConvergenceError("jzs_bf_regression: quadrature failed");
  }

  BfResult r;
  r.rscale = rscale;
  r.threshold = threshold;
  r.log_bf10 = log_max + std::log(integral);
  r.bf10 = std::exp(r.log_bf10);
  return r;
}

/// Trichotomous Bayes-factor decision. Threshold comparisons are
/// inclusive on both sides.
inline DecisionOutcome bf_decide(const BfResult& b) {
  if (!(b.threshold > 1.0)) throw std::invalid_argument("bf_decide: threshold must be > 1");
  const double log_thr = std::log(b.threshold);
  DecisionOutcome d;
  if (b.log_bf10 >= log_thr) {
    d.label = DecisionLabel::Positive;
  } else if (b.log_bf10 <= -log_thr) {
    d.label = DecisionLabel::Negative;
  } else {
    d.label = DecisionLabel::Inconclusive;
  }
  return d;
}

}  // namespace omnibus

#endif  // OMNIBUS_BAYES_HPP
