#ifndef OMNIBUS_SIMULATION_HPP
#define OMNIBUS_SIMULATION_HPP

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "omnibus/bayes.hpp"
#include "omnibus/design.hpp"
#include "omnibus/inference.hpp"
#include "omnibus/model_fit.hpp"
#include "omnibus/ncf.hpp"
#include "omnibus/rng.hpp"

namespace omnibus {

/// One simulation cell: a fixed balanced binary design, true coefficients
/// and noise variance, the decision rules to apply, and the replication
/// plan.
struct Scenario {
  std::string name;
  std::int64_t n_obs = 0;  // requested; the design may truncate, see below
  std::int64_t k = 0;      // number of binary covariates
  std::vector<double> beta;  // k+1 coefficients, intercept first
  double sigma_sq = 1.0;
  std::vector<double> delta_grid;
  double alpha = 0.05;
  std::vector<double> bf_thresholds;  // empty disables BF evaluation
  double bf_rscale = kRscaleMedium;
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1) throw std::invalid_argument("Scenario: k must be >= 1");
    if (beta.size() != static_cast<std::size_t>(k) + 1) {
      throw std::invalid_argument("Scenario: beta must have k+1 entries");
    }
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("Scenario: sigma_sq must be > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
      throw std::invalid_argument("Scenario: alpha must be in (0,1)");
    }
    if (delta_grid.empty()) throw std::invalid_argument("Scenario: empty delta grid");
    for (double d : delta_grid) {
      if (!(d > 0.0) || !(d < 1.0)) {
        throw std::invalid_argument("Scenario: every delta must be in (0,1)");
      }
    }
    for (double t : bf_thresholds) {
      if (!(t > 1.0)) throw std::invalid_argument("Scenario: BF thresholds must be > 1");
    }
    if (replicates < 1) throw std::invalid_argument("Scenario: replicates must be >= 1");
    design_effective_n(n_obs, k);  // throws when the design cannot be built
  }
};

/// Population coefficient of determination for the balanced binary
/// orthogonal design: every covariate has variance 1/4 and zero pairwise
/// covariance, so the explained variance is sum(beta_j^2)/4.
inline double true_p_squared(const std::vector<double>& beta, double sigma_sq) {
  if (beta.size() < 2) throw std::invalid_argument("true_p_squared: beta must have k+1 >= 2 entries");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("true_p_squared: sigma_sq must be > 0");
  design_granularity(static_cast<std::int64_t>(beta.size()) - 1);
  double explained = 0.0;
  for (std::size_t j = 1; j < beta.size(); ++j) explained += 0.25 * beta[j] * beta[j];
  return explained / (explained + sigma_sq);
}

struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // no intercept column
};

/// Draws one replicate: the fixed design plus Normal(X*beta, sigma^2)
/// outcomes. Deterministic in (scenario.seed, replicate_index).
inline Dataset simulate_dataset(const Scenario& sc, std::uint64_t replicate_index) {
  sc.validate();
  Dataset d;
  d.x = design_matrix(sc.n_obs, sc.k);
  const std::int64_t n = d.x.rows();
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, sc.beta[0]);
  for (std::int64_t j = 0; j < sc.k; ++j) mean += sc.beta[j + 1] * d.x.col(j);
  const double sigma = std::sqrt(sc.sigma_sq);
  GaussianStream stream(sc.seed, replicate_index);
  d.y.resize(n);
  for (std::int64_t i = 0; i < n; ++i) d.y[i] = mean[i] + sigma * stream.standard_normal();
  return d;
}

struct RateTriple {
  double positive = 0.0;
  double negative = 0.0;
  double inconclusive = 0.0;
};

/// Aggregated operating characteristics of one scenario.
struct ScenarioResult {
  Scenario scenario;
  std::int64_t n_effective = 0;
  double true_p2 = 0.0;
  std::vector<double> rejection_rate;  // per delta: P(noninf p < alpha)
  std::vector<double> power_approx;    // per delta: analytic power at P^2 = 0
  std::vector<RateTriple> cet;         // per delta
  std::vector<RateTriple> bf;          // per threshold
  std::vector<double> agreement;       // delta-major [delta][threshold]
  std::vector<double> contradiction;   // delta-major [delta][threshold]
  std::int64_t failures = 0;
  double mc_se = 0.0;  // worst-case SE, sqrt(.25/R)

  double rate_se(double rate) const {
    const double r = static_cast<double>(scenario.replicates);
    return std::sqrt(std::max(rate * (1.0 - rate), 0.0) / r);
  }
};

namespace detail {

struct ReplicateRecord {
  double log_bf = std::numeric_limits<double>::quiet_NaN();
  std::uint32_t reject_mask = 0;  // bit d: noninf p for delta_grid[d] < alpha
  std::uint8_t nhst_sig = 0;
  std::uint8_t failed = 0;
};

inline int bf_label(double log_bf, double log_thr) {
  if (log_bf >= log_thr) return 0;   // positive
  if (log_bf <= -log_thr) return 1;  // negative
  return 2;                          // inconclusive
}

}  // namespace detail

/// Runs every replicate of a scenario and aggregates rates. Replicates
/// fan out across workers; each replicate owns an independent RNG stream
/// keyed by its index, and aggregation is an ordered fold over integer
/// counts, so results do not depend on the worker count.
inline ScenarioResult run_scenario(const Scenario& sc, int n_threads = 1) {
  sc.validate();
  if (sc.delta_grid.size() > 32) {
    throw std::invalid_argument("run_scenario: at most 32 deltas per scenario");
  }
  if (n_threads < 1) n_threads = 1;

  const Eigen::MatrixXd x = design_matrix(sc.n_obs, sc.k);
  const std::int64_t n = x.rows();
  const std::int64_t k = sc.k;
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = x;
  Eigen::VectorXd mean = design * Eigen::Map<const Eigen::VectorXd>(sc.beta.data(), k + 1);

  // the design is fixed, so factor it once; per replicate only
  // projections remain
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, k + 1);

  const double sigma = std::sqrt(sc.sigma_sq);
  const double df1 = static_cast<double>(k);
  const double df2 = static_cast<double>(n - k - 1);
  std::vector<double> ncps(sc.delta_grid.size());
  for (std::size_t d = 0; d < sc.delta_grid.size(); ++d) {
    ncps[d] = static_cast<double>(n) * sc.delta_grid[d] / (1.0 - sc.delta_grid[d]);
  }
  const bool with_bf = !sc.bf_thresholds.empty();

  std::vector<detail::ReplicateRecord> records(sc.replicates);

  const auto worker = [&](std::int64_t lo, std::int64_t hi) {
    Eigen::VectorXd y(n), coeffs(k + 1);
    for (std::int64_t rep = lo; rep < hi; ++rep) {
      detail::ReplicateRecord& rec = records[rep];
      try {
        GaussianStream stream(sc.seed, static_cast<std::uint64_t>(rep));
        for (std::int64_t i = 0; i < n; ++i) {
          y[i] = mean[i] + sigma * stream.standard_normal();
        }
        const double ybar = y.mean();
        const double ss_tot = (y.array() - ybar).matrix().squaredNorm();
        coeffs.noalias() = thin_q.transpose() * y;
        const double ss_res = (y - thin_q * coeffs).squaredNorm();
        double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
        if (r2 < 0.0) r2 = 0.0;
        if (r2 > 1.0) r2 = 1.0;
        const double f_stat =
            r2 < 1.0 ? (r2 / df1) / ((1.0 - r2) / df2)
                     : std::numeric_limits<double>::infinity();

        const double p1 = ncf_sf(f_stat, {df1, df2, 0.0});
        rec.nhst_sig = p1 < sc.alpha ? 1 : 0;
        for (std::size_t d = 0; d < ncps.size(); ++d) {
          const double p2 = ncf_cdf(f_stat, {df1, df2, ncps[d]});
          if (p2 < sc.alpha) rec.reject_mask |= (1u << d);
        }
        if (with_bf) {
          RegressionSummary rs;
          rs.n_obs = n;
          rs.n_predictors = k;
          rs.r_squared = r2 < 1.0 ? r2 : std::nextafter(1.0, 0.0);
          rs.f_stat = f_stat;
          rec.log_bf = jzs_bf_regression(rs, sc.bf_rscale).log_bf10;
        }
      } catch (const std::exception&) {
        rec.failed = 1;
      }
    }
  };

  if (n_threads == 1 || sc.replicates < 2 * n_threads) {
    worker(0, sc.replicates);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::int64_t chunk = (sc.replicates + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(sc.replicates, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  // ordered fold over integer counts
  const std::size_t n_delta = sc.delta_grid.size();
  const std::size_t n_thr = sc.bf_thresholds.size();
  std::vector<std::int64_t> reject_count(n_delta, 0);
  std::vector<std::int64_t> cet_count(n_delta * 3, 0);
  std::vector<std::int64_t> bf_count(n_thr * 3, 0);
  std::vector<std::int64_t> agree_count(n_delta * n_thr, 0);
  std::vector<std::int64_t> contra_count(n_delta * n_thr, 0);
  std::vector<double> log_thrs(n_thr);
  for (std::size_t t = 0; t < n_thr; ++t) log_thrs[t] = std::log(sc.bf_thresholds[t]);

  std::int64_t failures = 0;
  for (const auto& rec : records) {
    if (rec.failed) {
      ++failures;
      continue;
    }
    for (std::size_t d = 0; d < n_delta; ++d) {
      const bool rejected = rec.reject_mask & (1u << d);
      if (rejected) ++reject_count[d];
      int cet_label;  // 0 positive, 1 negative, 2 inconclusive
      if (rec.nhst_sig) {
        cet_label = 0;
      } else if (rejected) {
        cet_label = 1;
      } else {
        cet_label = 2;
      }
      ++cet_count[d * 3 + cet_label];
      for (std::size_t t = 0; t < n_thr; ++t) {
        const int bfl = detail::bf_label(rec.log_bf, log_thrs[t]);
        if (d == 0) ++bf_count[t * 3 + bfl];
        if (bfl == cet_label) ++agree_count[d * n_thr + t];
        if ((bfl == 0 && cet_label == 1) || (bfl == 1 && cet_label == 0)) {
          ++contra_count[d * n_thr + t];
        }
      }
    }
  }

  ScenarioResult res;
  res.scenario = sc;
  res.n_effective = n;
  res.true_p2 = true_p_squared(sc.beta, sc.sigma_sq);
  res.failures = failures;
  const double denom = static_cast<double>(sc.replicates - failures);
  if (denom <= 0.0) {
    throw ConvergenceError("run_scenario: every replicate failed");
  }
  res.mc_se = std::sqrt(0.25 / denom);
  res.rejection_rate.resize(n_delta);
  res.power_approx.resize(n_delta);
  res.cet.resize(n_delta);
  for (std::size_t d = 0; d < n_delta; ++d) {
    res.rejection_rate[d] = reject_count[d] / denom;
    res.power_approx[d] =
        power_noninf(n, k, sc.delta_grid[d], sc.alpha, PowerKind::Regression);
    res.cet[d] = {cet_count[d * 3] / denom, cet_count[d * 3 + 1] / denom,
                  cet_count[d * 3 + 2] / denom};
  }
  res.bf.resize(n_thr);
  for (std::size_t t = 0; t < n_thr; ++t) {
    res.bf[t] = {bf_count[t * 3] / denom, bf_count[t * 3 + 1] / denom,
                 bf_count[t * 3 + 2] / denom};
  }
  res.agreement.resize(n_delta * n_thr);
  res.contradiction.resize(n_delta * n_thr);
  for (std::size_t i = 0; i < n_delta * n_thr; ++i) {
    res.agreement[i] = agree_count[i] / denom;
    res.contradiction[i] = contra_count[i] / denom;
  }
  return res;
}

/// Replicate-weighted average agreement and strict-contradiction rates
/// across scenarios for one (delta, threshold) pair.
inline std::pair<double, double> agreement_summary(
    const std::vector<ScenarioResult>& results, double delta, double threshold) {
  if (results.empty()) throw std::invalid_argument("agreement_summary: no results");
  double weight = 0.0, agree = 0.0, contra = 0.0;
  for (const auto& r : results) {
    std::size_t di = r.scenario.delta_grid.size();
    std::size_t ti = r.scenario.bf_thresholds.size();
    for (std::size_t d = 0; d < r.scenario.delta_grid.size(); ++d) {
      if (std::fabs(r.scenario.delta_grid[d] - delta) < 1e-12) di = d;
    }
    for (std::size_t t = 0; t < r.scenario.bf_thresholds.size(); ++t) {
      if (std::fabs(r.scenario.bf_thresholds[t] - threshold) < 1e-12) ti = t;
    }
    if (di == r.scenario.delta_grid.size() || ti == r.scenario.bf_thresholds.size()) {
      throw std::invalid_argument(
          "agreement_summary: scenario lacks the requested delta/threshold");
    }
    const double w = static_cast<double>(r.scenario.replicates - r.failures);
    const std::size_t idx = di * r.scenario.bf_thresholds.size() + ti;
    weight += w;
    agree += w * r.agreement[idx];
    contra += w * r.contradiction[idx];
  }
  return {agree / weight, contra / weight};
}

}  // namespace omnibus

#endif  // OMNIBUS_SIMULATION_HPP
