#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "omnibus/design.hpp"
#include "omnibus/rng.hpp"
#include "omnibus/sim_config.hpp"
#include "omnibus/sim_io.hpp"
#include "omnibus/simulation.hpp"
#include "oracles.hpp"

using namespace omnibus;

namespace {

Scenario basic_scenario() {
  Scenario sc;
  sc.name = "test";
  sc.n_obs = 60;
  sc.k = 2;
  sc.beta = {0.0, 0.2, 0.3};
  sc.sigma_sq = 1.0;
  sc.delta_grid = {0.031476997578692496};
  sc.alpha = 0.05;
  sc.replicates = 2000;
  sc.seed = 99u;
  return sc;
}

}  // namespace

TEST_CASE("designs are balanced and pairwise orthogonal", "[simulation]") {
  const struct {
    std::int64_t n, k, expect_n;
  } cases[] = {{60, 1, 60},  {61, 1, 60},   {60, 2, 60},  {62, 2, 60},
               {60, 3, 60},  {20, 4, 20},   {30, 4, 28},  {42, 4, 40},
               {60, 4, 60},  {88, 4, 88},   {126, 4, 124}, {1000, 4, 1000},
               {5000, 4, 5000}, {24, 7, 24}, {28, 6, 28}};
  for (const auto& c : cases) {
    CAPTURE(c.n, c.k);
    CHECK(design_effective_n(c.n, c.k) == c.expect_n);
    const Eigen::MatrixXd x = design_matrix(c.n, c.k);
    REQUIRE(x.rows() == c.expect_n);
    REQUIRE(x.cols() == c.k);
    const auto rows = x.rows();
    for (std::int64_t i = 0; i < c.k; ++i) {
      CHECK(x.col(i).sum() * 2 == static_cast<double>(rows));
      for (std::int64_t j = i + 1; j < c.k; ++j) {
        // every level pair must appear rows/4 times
        int counts[4] = {0, 0, 0, 0};
        for (std::int64_t r = 0; r < rows; ++r) {
          counts[static_cast<int>(x(r, i)) * 2 + static_cast<int>(x(r, j))]++;
        }
        CAPTURE(i, j);
        CHECK(counts[0] == rows / 4);
        CHECK(counts[1] == rows / 4);
        CHECK(counts[2] == rows / 4);
        CHECK(counts[3] == rows / 4);
      }
    }
  }
  CHECK_THROWS_AS(design_matrix(100, 8), std::invalid_argument);
  CHECK_THROWS_AS(design_matrix(4, 4), std::invalid_argument);
}

TEST_CASE("true P^2 reproduces the published values", "[simulation]") {
  const auto round3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  CHECK(round3(true_p_squared({0.0, 0.2, 0.3}, 1.0)) == 0.031);
  CHECK(round3(true_p_squared({0.0, 0.2, 0.3}, 0.5)) == 0.061);
  CHECK(round3(true_p_squared({0.0, 0.2, 0.3}, 0.4)) == 0.075);
  CHECK(round3(true_p_squared({0.0, 0.2, 0.2, -0.1, -0.2}, 9.0)) == 0.004);
  CHECK(round3(true_p_squared({0.0, 0.2, 0.2, -0.1, -0.2}, 1.0)) == 0.031);
  CHECK(round3(true_p_squared({0.0, 0.2, 0.2, -0.1, -0.2}, 0.5)) == 0.061);
  CHECK(true_p_squared({0.0, 0.0, 0.0}, 1.0) == 0.0);
  CHECK(true_p_squared({5.0, 0.0, 0.0, 0.0, 0.0}, 1.0) == 0.0);
  CHECK_THROWS_AS(true_p_squared({0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(true_p_squared({0.0, 0.1}, 0.0), std::invalid_argument);
}

TEST_CASE("datasets are deterministic in (seed, replicate)", "[simulation]") {
  const Scenario sc = basic_scenario();
  const Dataset a = simulate_dataset(sc, 7);
  const Dataset b = simulate_dataset(sc, 7);
  REQUIRE(a.y.size() == b.y.size());
  for (Eigen::Index i = 0; i < a.y.size(); ++i) {
    CHECK(a.y[i] == b.y[i]);  // bit-identical
  }
  const Dataset c = simulate_dataset(sc, 8);
  bool any_diff = false;
  for (Eigen::Index i = 0; i < a.y.size(); ++i) {
    if (a.y[i] != c.y[i]) any_diff = true;
  }
  CHECK(any_diff);

  Scenario other = sc;
  other.seed = 100u;
  const Dataset d = simulate_dataset(other, 7);
  bool seed_diff = false;
  for (Eigen::Index i = 0; i < a.y.size(); ++i) {
    if (a.y[i] != d.y[i]) seed_diff = true;
  }
  CHECK(seed_diff);
}

TEST_CASE("noiseless limit recovers the coefficients", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.sigma_sq = 1e-12;
  const Dataset d = simulate_dataset(sc, 0);
  std::vector<double> y(d.y.data(), d.y.data() + d.y.size());
  std::vector<std::vector<double>> cols(sc.k);
  for (std::int64_t c = 0; c < sc.k; ++c) {
    cols[c].assign(d.x.col(c).data(), d.x.col(c).data() + d.x.rows());
  }
  const auto fit = oracles::lstsq_normal_equations(y, cols);
  for (std::size_t j = 0; j < sc.beta.size(); ++j) {
    CHECK(std::fabs(fit.beta[j] - sc.beta[j]) < 1e-4);
  }
  const auto summary = fit_regression(d.y, d.x);
  CHECK(summary.r_squared > 0.999999);
}

TEST_CASE("R^2 is biased upward in small null samples", "[simulation]") {
  Scenario sc;
  sc.n_obs = 60;
  sc.k = 4;
  sc.beta = {0.0, 0.0, 0.0, 0.0, 0.0};
  sc.sigma_sq = 1.0;
  sc.delta_grid = {0.05};
  sc.replicates = 1;
  sc.seed = 4321u;
  double mean_r2 = 0.0;
  const int reps = 5000;
  for (int rep = 0; rep < reps; ++rep) {
    const Dataset d = simulate_dataset(sc, rep);
    mean_r2 += fit_regression(d.y, d.x).r_squared;
  }
  mean_r2 /= reps;
  // expectation is roughly K/(N-1) = 0.068 here, far above zero
  CHECK(mean_r2 > 0.05);
}

TEST_CASE("run_scenario holds the boundary type-I error", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.delta_grid = {true_p_squared(sc.beta, sc.sigma_sq)};
  sc.replicates = 4000;
  const auto res = run_scenario(sc);
  CHECK(res.n_effective == 60);
  CHECK(std::fabs(res.true_p2 - sc.delta_grid[0]) < 1e-15);
  const double se = std::sqrt(0.05 * 0.95 / sc.replicates);
  CHECK(std::fabs(res.rejection_rate[0] - 0.05) <= 4.0 * se);
  CHECK(res.failures == 0);

  // outcome triple partitions exactly, and CET positive rate equals the
  // NHST rejection rate by construction
  const auto& t = res.cet[0];
  CHECK(t.positive + t.negative + t.inconclusive == 1.0);
}

TEST_CASE("rejection rate is non-decreasing in delta", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.beta = {0.0, 0.0, 0.0};
  sc.delta_grid = {0.01, 0.02, 0.04, 0.07, 0.10};
  sc.replicates = 1500;
  const auto res = run_scenario(sc);
  for (std::size_t i = 1; i < res.rejection_rate.size(); ++i) {
    CHECK(res.rejection_rate[i] >= res.rejection_rate[i - 1]);
  }
  // analytic power is also monotone and tracks the empirical rate loosely
  for (std::size_t i = 0; i < res.rejection_rate.size(); ++i) {
    CHECK(std::fabs(res.rejection_rate[i] - res.power_approx[i]) < 0.05);
  }
}

TEST_CASE("scenario results are identical across worker counts", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.delta_grid = {0.02, 0.05};
  sc.bf_thresholds = {3.0, 10.0};
  sc.n_obs = 24;
  sc.replicates = 400;
  const auto serial = run_scenario(sc, 1);
  const auto parallel = run_scenario(sc, 8);
  CHECK(serial.rejection_rate == parallel.rejection_rate);
  CHECK(serial.agreement == parallel.agreement);
  CHECK(serial.contradiction == parallel.contradiction);
  for (std::size_t i = 0; i < serial.cet.size(); ++i) {
    CHECK(serial.cet[i].positive == parallel.cet[i].positive);
    CHECK(serial.cet[i].negative == parallel.cet[i].negative);
    CHECK(serial.cet[i].inconclusive == parallel.cet[i].inconclusive);
  }
  for (std::size_t i = 0; i < serial.bf.size(); ++i) {
    CHECK(serial.bf[i].positive == parallel.bf[i].positive);
  }

  std::ostringstream csv_a, csv_b;
  const std::vector<ScenarioResult> ra = {serial}, rb = {parallel};
  write_results_csv(csv_a, ra);
  write_results_csv(csv_b, rb);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("no inconclusive outcomes past the conclusiveness threshold", "[simulation]") {
  Scenario sc;
  sc.name = "k5";
  sc.n_obs = 185;  // design truncates to 184; the threshold already holds there
  sc.k = 5;
  sc.beta = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  sc.sigma_sq = 1.0;
  sc.delta_grid = {0.10};
  sc.replicates = 2000;
  sc.seed = 31u;
  const auto big = run_scenario(sc);
  CHECK(big.cet[0].inconclusive == 0.0);

  sc.n_obs = 60;
  const auto small = run_scenario(sc);
  CHECK(small.cet[0].inconclusive > 0.0);
}

TEST_CASE("agreement summary weights scenarios by replicates", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.delta_grid = {0.05};
  sc.bf_thresholds = {3.0};
  sc.replicates = 300;
  auto r1 = run_scenario(sc);
  sc.n_obs = 88;
  sc.replicates = 600;
  sc.seed = 123u;
  auto r2 = run_scenario(sc);
  const auto [agree, contra] = agreement_summary({r1, r2}, 0.05, 3.0);
  const double expect_agree =
      (300.0 * r1.agreement[0] + 600.0 * r2.agreement[0]) / 900.0;
  CHECK(std::fabs(agree - expect_agree) <= 1e-12);
  CHECK(contra >= 0.0);
  CHECK(contra <= 1.0);
  CHECK_THROWS_AS(agreement_summary({r1}, 0.25, 3.0), std::invalid_argument);
}

TEST_CASE("config parsing round trip", "[simulation]") {
  const std::string text = R"(
# global defaults
replicates = 500
alpha = 0.05
seed = 42
deltas = [0.01, 0.05, 0.10]
bf_thresholds = [3, 6, 10]
bf_rscale = medium

scenario { name = "a", n = 60, k = 2, beta = [0.0, 0.2, 0.3], sigma_sq = 1.0 }
scenario {
  name = "b", n = 126, k = 4,
  beta = [0.0, 0.2, 0.2, -0.1, -0.2],
  sigma_sq = 9.0, replicates = 250, seed = 7
}
)";
  std::istringstream in(text);
  const SimConfig cfg = parse_sim_config(in);
  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.seed == 42u);

  const auto& a = cfg.scenarios[0];
  CHECK(a.name == "a");
  CHECK(a.n_obs == 60);
  CHECK(a.k == 2);
  CHECK(a.beta == std::vector<double>{0.0, 0.2, 0.3});
  CHECK(a.replicates == 500);
  CHECK(a.delta_grid.size() == 3);
  CHECK(a.bf_thresholds.size() == 3);
  CHECK(a.bf_rscale == kRscaleMedium);
  CHECK(a.seed == derive_seed(42u, 0));

  const auto& b = cfg.scenarios[1];
  CHECK(b.name == "b");
  CHECK(b.sigma_sq == 9.0);
  CHECK(b.replicates == 250);
  CHECK(b.seed == 7u);
}

TEST_CASE("config errors carry context", "[simulation]") {
  {
    std::istringstream in("scenario { n = 60, k = 2, sigma_sq = 1.0 }\nreplicates = 10\ndeltas = [0.05]\n");
    CHECK_THROWS_AS(parse_sim_config(in), ConfigError);  // missing beta
  }
  {
    std::istringstream in("replicates = ten\nscenario { n = 60, k = 2, beta = [0,0,0], sigma_sq = 1 }");
    CHECK_THROWS_AS(parse_sim_config(in), ConfigError);
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_sim_config(in), ConfigError);  // no scenarios
  }
  {
    std::istringstream in("scenario { n = 60, k = 2, beta = [0,0,0,0], sigma_sq = 1, deltas = [0.05], replicates = 5 }");
    CHECK_THROWS_AS(parse_sim_config(in), ConfigError);  // beta length mismatch
  }
}

TEST_CASE("results CSV round trip", "[simulation]") {
  Scenario sc = basic_scenario();
  sc.delta_grid = {0.05, 0.10};
  sc.bf_thresholds = {3.0};
  sc.n_obs = 24;
  sc.replicates = 120;
  const auto res = run_scenario(sc);
  std::ostringstream out;
  const std::vector<ScenarioResult> results = {res};
  write_results_csv(out, results);

  std::istringstream in(out.str());
  const auto rows = read_results_csv(in);
  REQUIRE(rows.size() == 2);  // two deltas x one threshold
  CHECK(rows[0].scenario == "test");
  CHECK(rows[0].replicates == 120);
  CHECK(rows[0].has_threshold);
  CHECK(rows[0].threshold == 3.0);
  CHECK(rows[0].agreement == res.agreement[0]);
  CHECK(rows[1].agreement == res.agreement[1]);
}

TEST_CASE("shipped presets parse and encode the study grids", "[simulation]") {
  const SimConfig sim1 = load_sim_config(std::string(OMNIBUS_PRESET_DIR) + "/sim1.cfg");
  CHECK(sim1.scenarios.size() == 32);
  int null_cells = 0;
  for (const auto& sc : sim1.scenarios) {
    CHECK(sc.replicates == 50000);
    CHECK(sc.delta_grid.size() == 19);
    CHECK(sc.bf_thresholds.empty());
    if (true_p_squared(sc.beta, sc.sigma_sq) == 0.0) ++null_cells;
  }
  CHECK(null_cells == 8);

  const SimConfig sim2 = load_sim_config(std::string(OMNIBUS_PRESET_DIR) + "/sim2.cfg");
  CHECK(sim2.scenarios.size() == 64);
  std::map<double, int> by_p2;
  for (const auto& sc : sim2.scenarios) {
    CHECK(sc.replicates == 5000);
    CHECK(sc.delta_grid.size() == 3);
    CHECK(sc.bf_thresholds.size() == 3);
    const double p2 = std::round(true_p_squared(sc.beta, sc.sigma_sq) * 1000.0) / 1000.0;
    by_p2[p2]++;
  }
  REQUIRE(by_p2.size() == 4);
  CHECK(by_p2[0.0] == 16);
  CHECK(by_p2[0.004] == 16);
  CHECK(by_p2[0.031] == 16);
  CHECK(by_p2[0.061] == 16);
}
