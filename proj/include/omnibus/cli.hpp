#ifndef OMNIBUS_CLI_HPP
#define OMNIBUS_CLI_HPP

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "omnibus/bayes.hpp"
#include "omnibus/inference.hpp"
#include "omnibus/input_table.hpp"
#include "omnibus/model_fit.hpp"
#include "omnibus/sim_config.hpp"
#include "omnibus/sim_io.hpp"
#include "omnibus/simulation.hpp"
#include "omnibus/version.hpp"

namespace omnibus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

using nlohmann::json;

namespace detail_cli {

// usage-level failures detected after flag parsing
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sig3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

inline json base_report(const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["warnings"] = json::array();
  return j;
}

inline std::vector<GroupSummary> parse_summaries(const std::string& spec) {
  std::vector<GroupSummary> groups;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    std::stringstream ps(part);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ps, field, ',')) {
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(field, &pos));
        if (pos != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw UsageError("--summaries: not a number: '" + field + "'");
      }
    }
    if (vals.size() != 3) {
      throw UsageError("--summaries: each group needs 'n,mean,sd', got '" + part + "'");
    }
    GroupSummary g;
    g.n = static_cast<std::int64_t>(vals[0]);
    if (static_cast<double>(g.n) != vals[0] || g.n < 1) {
      throw UsageError("--summaries: group size must be a positive integer");
    }
    g.mean = vals[1];
    g.sd = vals[2];
    if (g.sd < 0.0) throw UsageError("--summaries: sd must be >= 0");
    groups.push_back(g);
  }
  if (groups.size() < 2) {
    throw UsageError("--summaries: need at least two groups separated by ';'");
  }
  return groups;
}

inline void check_delta_arg(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw UsageError("--delta must lie strictly inside (0, 1); pick the "
                     "smallest effect size of interest before seeing data");
  }
}

inline void check_alpha_arg(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw UsageError("--alpha must lie strictly inside (0, 1)");
  }
}

inline int default_threads() {
  if (const char* env = std::getenv("OMNIBUS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

inline json test_result_json(const TestResult& r) {
  json j;
  j["statistic"] = r.statistic;
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  j["ncp"] = r.ncp_used;
  j["p_value"] = r.p_value;
  j["kind"] = to_string(r.kind);
  if (r.delta) j["delta"] = *r.delta;
  if (r.underflow) j["underflow"] = true;
  return j;
}

inline json decision_json(const DecisionOutcome& d) {
  json j;
  j["label"] = to_string(d.label);
  j["significant_yet_not_meaningful"] = d.significant_yet_not_meaningful;
  return j;
}

inline double parse_rscale(const std::string& text) {
  if (text == "medium") return kRscaleMedium;
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size() && v > 0.0) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("--rscale must be 'medium' or a positive number");
}

}  // namespace detail_cli

/// Runs the command line given argv-style arguments (program name
/// excluded). JSON reports go to `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using detail_cli::UsageError;
  using detail_cli::sig3;

  CLI::App app{"Omnibus non-inferiority testing for regression R^2 and ANOVA eta^2"};
  app.fallthrough();  // let subcommands pass --human etc. up to the app
  app.set_version_flag("--version", std::string(kVersion));
  bool human = false;
  app.add_flag("--human", human, "Terse human-readable output instead of JSON");

  // ---- test ----
  auto* test = app.add_subcommand("test", "Run the omnibus tests on data or summaries");
  test->require_subcommand(1);

  struct {
    std::string data, ycol, xcols, group, summaries;
    double r2 = -1.0, delta = -1.0, alpha = 0.05;
    std::int64_t n = 0, k = 0;
    std::string variant = "hom";
  } targs;

  auto* treg = test->add_subcommand("regression", "Omnibus test of the regression R^2");
  treg->add_option("--data", targs.data, "CSV file with raw data (or '-' for stdin)");
  treg->add_option("--y", targs.ycol, "outcome column name");
  treg->add_option("--x", targs.xcols, "comma-separated covariate column names");
  treg->add_option("--r2", targs.r2, "observed R^2 (summary path)");
  treg->add_option("--n", targs.n, "number of observations (summary path)");
  treg->add_option("--k", targs.k, "number of predictors (summary path)");
  treg->add_option("--delta", targs.delta, "non-inferiority margin in (0,1)")->required();
  treg->add_option("--alpha", targs.alpha, "significance level");

  auto* tanova = test->add_subcommand("anova", "Omnibus test of the ANOVA eta^2");
  tanova->add_option("--data", targs.data, "CSV file with raw data (or '-' for stdin)");
  tanova->add_option("--y", targs.ycol, "outcome column name");
  tanova->add_option("--group", targs.group, "group column name");
  tanova->add_option("--summaries", targs.summaries,
                     "per-group 'n,mean,sd' triples separated by ';'");
  tanova->add_option("--delta", targs.delta, "non-inferiority margin in (0,1)")->required();
  tanova->add_option("--alpha", targs.alpha, "significance level");
  tanova->add_option("--variant", targs.variant,
                     "which p-value drives the decision: hom or welch")
      ->check(CLI::IsMember({"hom", "welch"}));

  // ---- power ----
  struct {
    std::int64_t n = 0, k = 0, j = 0;
    double delta = -1.0, alpha = 0.05;
    std::string kind = "regression";
  } pargs;
  auto* power = app.add_subcommand("power", "Analytic power of the non-inferiority test");
  power->add_option("--n", pargs.n, "number of observations")->required();
  power->add_option("--k", pargs.k, "number of predictors (regression)");
  power->add_option("--j", pargs.j, "number of groups (anova)");
  power->add_option("--delta", pargs.delta, "non-inferiority margin in (0,1)")->required();
  power->add_option("--alpha", pargs.alpha, "significance level");
  power->add_option("--kind", pargs.kind, "regression or anova")
      ->check(CLI::IsMember({"regression", "anova"}));

  // ---- bf ----
  struct {
    double r2 = -1.0, threshold = 3.0;
    std::int64_t n = 0, k = 0;
    std::string rscale = "medium";
  } bargs;
  auto* bf = app.add_subcommand("bf", "JZS default Bayes factor from (R^2, N, K)");
  bf->add_option("--r2", bargs.r2, "observed R^2")->required();
  bf->add_option("--n", bargs.n, "number of observations")->required();
  bf->add_option("--k", bargs.k, "number of predictors")->required();
  bf->add_option("--rscale", bargs.rscale, "prior scale: 'medium' or a number");
  bf->add_option("--threshold", bargs.threshold, "evidence threshold (> 1)");

  // ---- simulate ----
  struct {
    std::string config, out_dir = "omnibus_out";
    std::int64_t replicates = 0;
    int threads = 0;
  } sargs;
  auto* sim = app.add_subcommand("simulate", "Run a scenario config and write CSV results");
  sim->add_option("config", sargs.config, "scenario config file")->required();
  sim->add_option("--replicates", sargs.replicates, "override replicates per scenario");
  sim->add_option("--out", sargs.out_dir, "output directory");
  sim->add_option("--threads", sargs.threads, "worker threads (default OMNIBUS_THREADS or 1)");

  // ---- agree ----
  struct {
    std::string in = "omnibus_out";
    double delta = -1.0, threshold = -1.0;
  } aargs;
  auto* agree = app.add_subcommand("agree", "Aggregate CET/BF agreement from simulate output");
  agree->add_option("--in", aargs.in, "results.csv or the simulate output directory");
  agree->add_option("--delta", aargs.delta, "margin to select")->required();
  agree->add_option("--threshold", aargs.threshold, "BF threshold to select")->required();

  // ---- regions ----
  struct {
    std::string ks = "1,5,12", out_file;
    double delta = 0.10, alpha = 0.05, threshold = 3.0;
    std::int64_t n_lo = 30, n_hi = 1000, n_points = 76, r2_points = 100;
    double r2_lo = 1e-4, r2_hi = 0.9;
  } rargs;
  auto* regions = app.add_subcommand(
      "regions", "Decision-region curve points over an (R^2, N) grid");
  regions->add_option("--k", rargs.ks, "comma-separated predictor counts");
  regions->add_option("--delta", rargs.delta, "non-inferiority margin");
  regions->add_option("--alpha", rargs.alpha, "significance level");
  regions->add_option("--threshold", rargs.threshold, "BF evidence threshold");
  regions->add_option("--n-lo", rargs.n_lo, "smallest N");
  regions->add_option("--n-hi", rargs.n_hi, "largest N");
  regions->add_option("--n-points", rargs.n_points, "N grid size");
  regions->add_option("--r2-lo", rargs.r2_lo, "smallest R^2");
  regions->add_option("--r2-hi", rargs.r2_hi, "largest R^2");
  regions->add_option("--r2-points", rargs.r2_points, "R^2 grid size");
  regions->add_option("--out", rargs.out_file, "write CSV here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    // ---------- test regression ----------
    if (test->parsed() && treg->parsed()) {
      detail_cli::check_delta_arg(targs.delta);
      detail_cli::check_alpha_arg(targs.alpha);
      const bool raw_path = !targs.data.empty();
      const bool summary_path = targs.r2 >= 0.0 || targs.n > 0 || targs.k > 0;
      if (raw_path == summary_path) {
        throw UsageError("provide exactly one of --data or the --r2/--n/--k summary flags");
      }

      RegressionSummary summary;
      json inputs;
      if (raw_path) {
        if (targs.ycol.empty() || targs.xcols.empty()) {
          throw UsageError("--data needs --y and --x");
        }
        InputTable table = targs.data == "-"
                               ? InputTable::read_csv(std::cin, "stdin")
                               : InputTable::read_csv_file(targs.data);
        const auto y = table.numeric_column(targs.ycol);
        std::vector<std::string> xnames;
        std::stringstream ss(targs.xcols);
        std::string name;
        while (std::getline(ss, name, ',')) {
          if (!name.empty()) xnames.push_back(name);
        }
        if (xnames.empty()) throw UsageError("--x lists no columns");
        Eigen::MatrixXd x(y.size(), xnames.size());
        for (std::size_t c = 0; c < xnames.size(); ++c) {
          const auto col = table.numeric_column(xnames[c]);
          for (std::size_t i = 0; i < col.size(); ++i) x(i, c) = col[i];
        }
        Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
        summary = fit_regression(yv, x);
        inputs["data"] = targs.data;
        inputs["y"] = targs.ycol;
        inputs["x"] = xnames;
      } else {
        if (!(targs.r2 >= 0.0) || targs.n <= 0 || targs.k <= 0) {
          throw UsageError("summary path needs --r2 in [0,1), --n and --k");
        }
        if (targs.r2 >= 1.0) throw UsageError("--r2 must be < 1");
        summary = regression_summary_from_r2(targs.n, targs.k, targs.r2);
        inputs["r2"] = targs.r2;
      }
      inputs["n"] = summary.n_obs;
      inputs["k"] = summary.n_predictors;
      inputs["delta"] = targs.delta;
      inputs["alpha"] = targs.alpha;

      const TestResult nhst = nhst_regression(summary, targs.alpha);
      const TestResult noninf = noninf_regression(summary, targs.delta, targs.alpha);
      const double eta_u = eta_sq_upper_ci(summary.f_stat, nhst.df1, nhst.df2,
                                           summary.n_obs, targs.alpha);
      const DecisionOutcome cet = cet_decide(nhst.p_value, noninf.p_value, targs.alpha);

      json report = detail_cli::base_report("test regression");
      report["inputs"] = inputs;
      json results;
      results["r_squared"] = summary.r_squared;
      results["f"] = summary.f_stat;
      results["df1"] = nhst.df1;
      results["df2"] = nhst.df2;
      results["nhst"] = detail_cli::test_result_json(nhst);
      results["noninf"] = detail_cli::test_result_json(noninf);
      results["eta_sq_upper"] = eta_u;
      results["cet"] = detail_cli::decision_json(cet);
      report["results"] = results;
      if (summary.perfect_fit) report["warnings"].push_back("perfect fit: F reported as +inf");
      if (nhst.underflow || noninf.underflow) {
        report["warnings"].push_back("a p-value underflowed below 1e-300 and was reported as 0");
      }
      if (human) {
        out << "F = " << sig3(summary.f_stat) << " (df " << nhst.df1 << ", "
            << nhst.df2 << "), R^2 = " << sig3(summary.r_squared) << "\n"
            << "NHST p = " << sig3(nhst.p_value) << "\n"
            << "non-inferiority p (delta = " << sig3(targs.delta)
            << ") = " << sig3(noninf.p_value) << "\n"
            << "eta^2 upper bound = " << sig3(eta_u) << "\n"
            << "CET decision: " << to_string(cet.label)
            << (cet.significant_yet_not_meaningful ? " (significant yet not meaningful)" : "")
            << "\n";
      } else {
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    // ---------- test anova ----------
    if (test->parsed() && tanova->parsed()) {
      detail_cli::check_delta_arg(targs.delta);
      detail_cli::check_alpha_arg(targs.alpha);
      const bool raw_path = !targs.data.empty();
      const bool summary_path = !targs.summaries.empty();
      if (raw_path == summary_path) {
        throw UsageError("provide exactly one of --data or --summaries");
      }

      std::vector<GroupSummary> groups;
      json inputs;
      if (raw_path) {
        if (targs.ycol.empty() || targs.group.empty()) {
          throw UsageError("--data needs --y and --group");
        }
        InputTable table = targs.data == "-"
                               ? InputTable::read_csv(std::cin, "stdin")
                               : InputTable::read_csv_file(targs.data);
        const auto by_group = table.group_numeric(targs.ycol, targs.group);
        if (by_group.size() < 2) {
          throw UsageError("group column '" + targs.group + "' has fewer than 2 levels");
        }
        json glist = json::array();
        for (const auto& [label, values] : by_group) {
          groups.push_back(summarize_group(values));
          glist.push_back({{"label", label},
                           {"n", groups.back().n},
                           {"mean", groups.back().mean},
                           {"sd", groups.back().sd}});
        }
        inputs["data"] = targs.data;
        inputs["groups"] = glist;
      } else {
        groups = detail_cli::parse_summaries(targs.summaries);
        json glist = json::array();
        for (const auto& g : groups) {
          glist.push_back({{"n", g.n}, {"mean", g.mean}, {"sd", g.sd}});
        }
        inputs["groups"] = glist;
      }
      inputs["delta"] = targs.delta;
      inputs["alpha"] = targs.alpha;
      inputs["variant"] = targs.variant;

      const AnovaSummary anova = anova_from_summaries(groups);
      const TestResult nhst_hom = nhst_anova(anova, targs.alpha);
      const TestResult noninf_hom = noninf_anova_hom(anova, targs.delta, targs.alpha);

      json report = detail_cli::base_report("test anova");
      report["inputs"] = inputs;
      json results;
      results["n"] = anova.n_total;
      results["j"] = anova.n_groups();
      results["ss_between"] = anova.ss_between;
      results["ss_within"] = anova.ss_within;
      results["eta_sq_hat"] = anova.eta_sq_hat;
      results["epsilon_sq_hat"] = anova.epsilon_sq_hat;
      results["omega_sq_hat"] = anova.omega_sq_hat;
      json hom;
      hom["f"] = anova.f_stat;
      hom["df1"] = nhst_hom.df1;
      hom["df2"] = nhst_hom.df2;
      hom["p_nhst"] = nhst_hom.p_value;
      hom["p_noninf"] = noninf_hom.p_value;
      hom["ncp"] = noninf_hom.ncp_used;
      results["hom"] = hom;

      std::optional<TestResult> nhst_w, noninf_w;
      if (anova.welch) {
        nhst_w = nhst_anova_welch(anova, targs.alpha);
        noninf_w = noninf_anova_welch(anova, targs.delta, targs.alpha);
        json welch;
        welch["f_prime"] = anova.welch->f_prime;
        welch["df_prime"] = anova.welch->df_prime;
        welch["p_nhst"] = nhst_w->p_value;
        welch["p_noninf"] = noninf_w->p_value;
        welch["ncp"] = noninf_w->ncp_used;
        results["welch"] = welch;
      } else {
        results["welch"] = nullptr;
        report["warnings"].push_back(
            anova.welch_unavailable_reason == WelchUnavailable::GroupTooSmall
                ? "Welch statistics unavailable: a group has n < 2"
                : "Welch statistics unavailable: a group has zero sample variance");
      }

      const bool use_welch = targs.variant == "welch";
      if (use_welch && !anova.welch) {
        throw UsageError("--variant welch requested but Welch statistics are unavailable");
      }
      const TestResult& nhst = use_welch ? *nhst_w : nhst_hom;
      const TestResult& noninf = use_welch ? *noninf_w : noninf_hom;
      const double eta_u = eta_sq_upper_ci(nhst.statistic, nhst.df1, nhst.df2,
                                           anova.n_total, targs.alpha);
      const DecisionOutcome cet = cet_decide(nhst.p_value, noninf.p_value, targs.alpha);
      results["f"] = nhst.statistic;
      results["df1"] = nhst.df1;
      results["df2"] = nhst.df2;
      results["ncp"] = noninf.ncp_used;
      results["p_nhst"] = nhst.p_value;
      results["p_noninf"] = noninf.p_value;
      results["eta_sq_upper"] = eta_u;
      results["cet"] = detail_cli::decision_json(cet);
      report["results"] = results;
      if (anova.negative_bias_corrected) {
        report["warnings"].push_back(
            "epsilon^2 or omega^2 is negative (bias-corrected estimators; reported as-is)");
      }
      if (nhst.underflow || noninf.underflow) {
        report["warnings"].push_back("a p-value underflowed below 1e-300 and was reported as 0");
      }
      if (human) {
        out << "F = " << sig3(nhst.statistic) << " (df " << nhst.df1 << ", "
            << nhst.df2 << "), eta^2 = " << sig3(anova.eta_sq_hat) << "\n"
            << "NHST p = " << sig3(nhst.p_value) << "\n"
            << "non-inferiority p (delta = " << sig3(targs.delta)
            << ", variant = " << targs.variant << ") = " << sig3(noninf.p_value) << "\n"
            << "eta^2 upper bound = " << sig3(eta_u) << "\n"
            << "CET decision: " << to_string(cet.label)
            << (cet.significant_yet_not_meaningful ? " (significant yet not meaningful)" : "")
            << "\n";
      } else {
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    // ---------- power ----------
    if (power->parsed()) {
      detail_cli::check_delta_arg(pargs.delta);
      detail_cli::check_alpha_arg(pargs.alpha);
      PowerKind kind = pargs.kind == "anova" ? PowerKind::Anova : PowerKind::Regression;
      std::int64_t k_or_j = 0;
      if (pargs.k > 0 && pargs.j > 0) throw UsageError("give only one of --k or --j");
      if (pargs.j > 0) {
        kind = PowerKind::Anova;
        k_or_j = pargs.j;
      } else if (pargs.k > 0) {
        k_or_j = pargs.k;
      } else {
        throw UsageError("one of --k or --j is required");
      }
      const double p = power_noninf(pargs.n, k_or_j, pargs.delta, pargs.alpha, kind);
      json report = detail_cli::base_report("power");
      report["inputs"] = {{"n", pargs.n},
                          {kind == PowerKind::Anova ? "j" : "k", k_or_j},
                          {"delta", pargs.delta},
                          {"alpha", pargs.alpha},
                          {"kind", kind == PowerKind::Anova ? "anova" : "regression"}};
      report["results"] = {{"power", p}};
      if (human) {
        out << "power = " << sig3(p) << "\n";
      } else {
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    // ---------- bf ----------
    if (bf->parsed()) {
      if (!(bargs.r2 >= 0.0) || bargs.r2 >= 1.0) throw UsageError("--r2 must be in [0,1)");
      if (!(bargs.threshold > 1.0)) throw UsageError("--threshold must be > 1");
      const double rscale = detail_cli::parse_rscale(bargs.rscale);
      RegressionSummary s;
      try {
        s = regression_summary_from_r2(bargs.n, bargs.k, bargs.r2);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const BfResult b = jzs_bf_regression(s, rscale, bargs.threshold);
      const DecisionOutcome d = bf_decide(b);
      json report = detail_cli::base_report("bf");
      report["inputs"] = {{"r2", bargs.r2},
                          {"n", bargs.n},
                          {"k", bargs.k},
                          {"rscale", b.rscale},
                          {"threshold", b.threshold}};
      report["results"] = {{"bf10", b.bf10},
                           {"log_bf10", b.log_bf10},
                           {"decision", detail_cli::decision_json(d)}};
      if (human) {
        out << "BF10 = " << sig3(b.bf10) << " (log = " << sig3(b.log_bf10)
            << "), decision: " << to_string(d.label) << "\n";
      } else {
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    // ---------- simulate ----------
    if (sim->parsed()) {
      SimConfig cfg;
      try {
        cfg = load_sim_config(sargs.config);
      } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
      }
      if (sargs.replicates > 0) {
        for (auto& sc : cfg.scenarios) sc.replicates = sargs.replicates;
      }
      const int threads = sargs.threads > 0 ? sargs.threads : detail_cli::default_threads();

      std::vector<ScenarioResult> results;
      results.reserve(cfg.scenarios.size());
      for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const auto& sc = cfg.scenarios[i];
        err << "[" << (i + 1) << "/" << cfg.scenarios.size() << "] " << sc.name
            << " (n=" << sc.n_obs << ", replicates=" << sc.replicates << ")\n";
        results.push_back(run_scenario(sc, threads));
      }

      namespace fs = std::filesystem;
      fs::create_directories(sargs.out_dir);
      const fs::path csv_path = fs::path(sargs.out_dir) / "results.csv";
      {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw UsageError("cannot write " + csv_path.string());
        write_results_csv(csv, results);
      }
      json manifest;
      manifest["version"] = kVersion;
      manifest["config"] = sargs.config;
      manifest["seed"] = cfg.seed;
      manifest["scenarios"] = json::array();
      for (const auto& r : results) {
        manifest["scenarios"].push_back({{"name", r.scenario.name},
                                         {"seed", r.scenario.seed},
                                         {"n_requested", r.scenario.n_obs},
                                         {"n_effective", r.n_effective},
                                         {"k", r.scenario.k},
                                         {"sigma_sq", r.scenario.sigma_sq},
                                         {"true_p_squared", r.true_p2},
                                         {"replicates", r.scenario.replicates},
                                         {"failures", r.failures},
                                         {"deltas", r.scenario.delta_grid},
                                         {"bf_thresholds", r.scenario.bf_thresholds},
                                         {"alpha", r.scenario.alpha}});
      }
      const fs::path manifest_path = fs::path(sargs.out_dir) / "manifest.json";
      {
        std::ofstream mf(manifest_path, std::ios::binary);
        if (!mf) throw UsageError("cannot write " + manifest_path.string());
        mf << manifest.dump(2) << "\n";
      }
      json report = detail_cli::base_report("simulate");
      report["inputs"] = {{"config", sargs.config}, {"threads", threads}};
      report["results"] = {{"out", sargs.out_dir},
                           {"scenarios", results.size()},
                           {"csv", csv_path.string()},
                           {"manifest", manifest_path.string()}};
      out << report.dump(2) << "\n";
      return kExitOk;
    }

    // ---------- agree ----------
    if (agree->parsed()) {
      namespace fs = std::filesystem;
      fs::path path(aargs.in);
      if (fs::is_directory(path)) path /= "results.csv";
      std::ifstream in_file(path);
      if (!in_file) {
        err << "error: cannot open " << path.string() << "\n";
        return kExitInput;
      }
      const auto rows = read_results_csv(in_file);
      double weight = 0.0, agree_sum = 0.0, contra_sum = 0.0;
      std::int64_t n_scen = 0;
      for (const auto& r : rows) {
        if (!r.has_threshold) continue;
        if (std::fabs(r.delta - aargs.delta) > 1e-12) continue;
        if (std::fabs(r.threshold - aargs.threshold) > 1e-12) continue;
        const double w = static_cast<double>(r.replicates - r.failures);
        weight += w;
        agree_sum += w * r.agreement;
        contra_sum += w * r.contradiction;
        ++n_scen;
      }
      if (weight <= 0.0) {
        err << "error: no rows match delta=" << aargs.delta
            << " threshold=" << aargs.threshold << "\n";
        return kExitInput;
      }
      json report = detail_cli::base_report("agree");
      report["inputs"] = {{"in", path.string()},
                          {"delta", aargs.delta},
                          {"threshold", aargs.threshold}};
      report["results"] = {{"agreement", agree_sum / weight},
                           {"contradiction", contra_sum / weight},
                           {"scenarios", n_scen},
                           {"weight", weight}};
      if (human) {
        out << "agreement = " << sig3(agree_sum / weight)
            << ", contradiction = " << sig3(contra_sum / weight) << "\n";
      } else {
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    // ---------- regions ----------
    if (regions->parsed()) {
      detail_cli::check_delta_arg(rargs.delta);
      detail_cli::check_alpha_arg(rargs.alpha);
      if (!(rargs.threshold > 1.0)) throw UsageError("--threshold must be > 1");
      std::vector<std::int64_t> ks;
      {
        std::stringstream ss(rargs.ks);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item.empty()) continue;
          try {
            ks.push_back(std::stoll(item));
          } catch (const std::exception&) {
            throw UsageError("--k: not an integer: '" + item + "'");
          }
        }
      }
      if (ks.empty()) throw UsageError("--k lists no values");
      if (rargs.n_points < 2 || rargs.r2_points < 2) {
        throw UsageError("--n-points and --r2-points must be >= 2");
      }
      if (!(rargs.r2_lo > 0.0) || !(rargs.r2_hi < 1.0) || rargs.r2_lo >= rargs.r2_hi) {
        throw UsageError("need 0 < --r2-lo < --r2-hi < 1");
      }

      std::ostringstream csv;
      csv << "k,n,r2,f,p_nhst,p_noninf,cet,significant_yet_not_meaningful,"
             "log_bf10,bf_decision\n";
      std::vector<std::int64_t> ns;
      for (std::int64_t i = 0; i < rargs.n_points; ++i) {
        const double frac = static_cast<double>(i) / (rargs.n_points - 1);
        const double v = std::exp(std::log(static_cast<double>(rargs.n_lo)) +
                                  frac * (std::log(static_cast<double>(rargs.n_hi)) -
                                          std::log(static_cast<double>(rargs.n_lo))));
        const auto n = static_cast<std::int64_t>(std::llround(v));
        if (ns.empty() || ns.back() != n) ns.push_back(n);
      }
      for (std::int64_t k : ks) {
        for (std::int64_t n : ns) {
          if (n <= k + 1) continue;
          for (std::int64_t ri = 0; ri < rargs.r2_points; ++ri) {
            const double frac = static_cast<double>(ri) / (rargs.r2_points - 1);
            const double r2 = std::exp(std::log(rargs.r2_lo) +
                                       frac * (std::log(rargs.r2_hi) - std::log(rargs.r2_lo)));
            const RegressionSummary s = regression_summary_from_r2(n, k, r2);
            const TestResult nhst = nhst_regression(s, rargs.alpha);
            const TestResult noninf = noninf_regression(s, rargs.delta, rargs.alpha);
            const DecisionOutcome cet = cet_decide(nhst.p_value, noninf.p_value, rargs.alpha);
            const BfResult b = jzs_bf_regression(s, kRscaleMedium, rargs.threshold);
            const DecisionOutcome bd = bf_decide(b);
            csv << k << ',' << n << ',' << detail_io::fmt(r2) << ','
                << detail_io::fmt(s.f_stat) << ',' << detail_io::fmt(nhst.p_value)
                << ',' << detail_io::fmt(noninf.p_value) << ','
                << to_string(cet.label) << ','
                << (cet.significant_yet_not_meaningful ? 1 : 0) << ','
                << detail_io::fmt(b.log_bf10) << ',' << to_string(bd.label) << "\n";
          }
        }
      }
      if (rargs.out_file.empty()) {
        out << csv.str();
      } else {
        std::ofstream f(rargs.out_file, std::ios::binary);
        if (!f) throw UsageError("cannot write " + rargs.out_file);
        f << csv.str();
        json report = detail_cli::base_report("regions");
        report["results"] = {{"out", rargs.out_file}};
        out << report.dump(2) << "\n";
      }
      return kExitOk;
    }

    err << "error: no subcommand given (try --help)\n";
    return kExitInput;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace omnibus::cli

#endif  // OMNIBUS_CLI_HPP
