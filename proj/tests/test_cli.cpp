#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "omnibus/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
  json report;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = omnibus::cli::run(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  if (!r.out.empty() && r.out.front() == '{') {
    r.report = json::parse(r.out);
  }
  return r;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("omnibus_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kHawthorneSummaries =
    "1483,-5.13,24.56;1532,-5.64,21.77;1565,-4.79,25.17";

}  // namespace

TEST_CASE("anova subcommand reproduces the worked example", "[cli]") {
  const auto r = run_cli({"test", "anova", "--summaries", kHawthorneSummaries,
                          "--delta", "0.01"});
  REQUIRE(r.code == 0);
  const auto& res = r.report["results"];
  CHECK(std::fabs(res["p_noninf"].get<double>() / 1.13e-9 - 1.0) < 0.05);
  CHECK(res["cet"]["label"] == "negative");
  CHECK(std::fabs(res["eta_sq_hat"].get<double>() - 0.000216) < 2e-5);
  CHECK(res["n"] == 4580);
  CHECK(res["j"] == 3);
  CHECK(res.contains("welch"));
  CHECK(res["welch"]["df_prime"].get<double>() > 2000.0);
  CHECK(res["eta_sq_upper"].get<double>() < 0.01);
}

TEST_CASE("regression subcommand matches the summary-flag path", "[cli]") {
  const auto r = run_cli({"test", "regression", "--r2", "0.000216", "--n",
                          "4580", "--k", "2", "--delta", "0.01"});
  REQUIRE(r.code == 0);
  const auto& res = r.report["results"];
  CHECK(std::fabs(res["noninf"]["p_value"].get<double>() / 1.13e-9 - 1.0) < 0.05);
  CHECK(std::fabs(res["nhst"]["p_value"].get<double>() - 0.61) < 0.01);
  CHECK(std::fabs(res["f"].get<double>() - 0.49) < 0.005);
  CHECK(res["cet"]["label"] == "negative");
  // test-CI duality: rejection at delta = 0.01 puts the bound below it
  CHECK(res["eta_sq_upper"].get<double>() < 0.01);
}

TEST_CASE("raw-data and summary paths agree", "[cli]") {
  const fs::path dir = temp_dir("rawdata");
  const fs::path csv = dir / "data.csv";
  {
    std::ofstream f(csv);
    f << "y,grp\n";
    omnibus::GaussianStream rng(2024u, 1);
    const char* labels[3] = {"a", "b", "c"};
    const double means[3] = {0.0, 0.3, -0.2};
    for (int g = 0; g < 3; ++g) {
      for (int i = 0; i < 25; ++i) {
        f << means[g] + rng.standard_normal() << "," << labels[g] << "\n";
      }
    }
  }
  const auto raw = run_cli({"test", "anova", "--data", csv.string(), "--y", "y",
                            "--group", "grp", "--delta", "0.05"});
  REQUIRE(raw.code == 0);

  // rebuild the summary string from the reported group summaries
  std::ostringstream spec;
  for (const auto& g : raw.report["inputs"]["groups"]) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g;",
                  g["n"].get<double>(), g["mean"].get<double>(),
                  g["sd"].get<double>());
    spec << buf;
  }
  const auto summ = run_cli({"test", "anova", "--summaries", spec.str(),
                             "--delta", "0.05"});
  REQUIRE(summ.code == 0);
  const double p_raw = raw.report["results"]["p_noninf"].get<double>();
  const double p_sum = summ.report["results"]["p_noninf"].get<double>();
  CHECK(std::fabs(p_raw - p_sum) <= 1e-9 * std::max(p_raw, 1e-12));
}

TEST_CASE("regression raw path runs a real fit", "[cli]") {
  const fs::path dir = temp_dir("regraw");
  const fs::path csv = dir / "reg.csv";
  {
    std::ofstream f(csv);
    f << "y,x1,x2\n";
    omnibus::GaussianStream rng(77u, 2);
    for (int i = 0; i < 30; ++i) {
      const double x1 = rng.standard_normal();
      const double x2 = rng.standard_normal();
      f << 0.4 * x1 - 0.1 * x2 + rng.standard_normal() << "," << x1 << ","
        << x2 << "\n";
    }
  }
  const auto r = run_cli({"test", "regression", "--data", csv.string(), "--y",
                          "y", "--x", "x1,x2", "--delta", "0.10"});
  REQUIRE(r.code == 0);
  CHECK(r.report["results"]["r_squared"].get<double>() > 0.0);
  CHECK(r.report["results"]["nhst"]["p_value"].get<double>() >= 0.0);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  // delta is mandatory and has no default
  CHECK(run_cli({"test", "regression", "--r2", "0.1", "--n", "50", "--k", "2"}).code == 2);
  CHECK(run_cli({"test", "regression", "--r2", "0.1", "--n", "50", "--k", "2",
                 "--delta", "0"}).code == 2);
  CHECK(run_cli({"test", "anova", "--summaries", "5,1,1", "--delta", "0.05"}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({}).code == 2);

  // empty input file
  const fs::path dir = temp_dir("empty");
  const fs::path csv = dir / "empty.csv";
  std::ofstream(csv).close();
  const auto r = run_cli({"test", "anova", "--data", csv.string(), "--y", "y",
                          "--group", "g", "--delta", "0.05"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);

  // missing cells are rejected with a row number
  const fs::path bad = dir / "bad.csv";
  {
    std::ofstream f(bad);
    f << "y,g\n1.0,a\n,b\n2.0,a\n1.5,b\n";
  }
  const auto rb = run_cli({"test", "anova", "--data", bad.string(), "--y", "y",
                           "--group", "g", "--delta", "0.05"});
  CHECK(rb.code == 2);
  CHECK(rb.err.find("row 3") != std::string::npos);
}

TEST_CASE("numeric failures exit with code 3", "[cli]") {
  const auto r = run_cli({"bf", "--r2", "0.5", "--n", "10", "--k", "2",
                          "--rscale", "1e300"});
  CHECK(r.code == 3);
}

TEST_CASE("power subcommand", "[cli]") {
  const auto r = run_cli({"power", "--n", "1000", "--k", "2", "--delta",
                          "0.001", "--alpha", "0.05"});
  REQUIRE(r.code == 0);
  const double p = r.report["results"]["power"].get<double>();
  CHECK(p > 0.05);
  CHECK(p < 0.2);

  double prev = 0.0;
  for (const char* n : {"200", "400", "800"}) {
    const auto rr = run_cli({"power", "--n", n, "--k", "3", "--delta", "0.05"});
    REQUIRE(rr.code == 0);
    const double pw = rr.report["results"]["power"].get<double>();
    CHECK(pw >= prev);
    prev = pw;
  }

  const auto anova = run_cli({"power", "--n", "300", "--j", "3", "--delta", "0.05"});
  REQUIRE(anova.code == 0);
  CHECK(anova.report["inputs"]["kind"] == "anova");
  CHECK(run_cli({"power", "--n", "300", "--delta", "0.05"}).code == 2);
  CHECK(run_cli({"power", "--n", "300", "--k", "2", "--j", "3", "--delta", "0.05"}).code == 2);
}

TEST_CASE("bf subcommand", "[cli]") {
  const auto r = run_cli({"bf", "--r2", "0.000216", "--n", "4580", "--k", "2"});
  REQUIRE(r.code == 0);
  CHECK(std::fabs(r.report["results"]["bf10"].get<double>() / 0.00284 - 1.0) < 0.02);
  CHECK(r.report["results"]["decision"]["label"] == "negative");

  const auto null_bf = run_cli({"bf", "--r2", "0", "--n", "60", "--k", "2"});
  REQUIRE(null_bf.code == 0);
  CHECK(null_bf.report["results"]["bf10"].get<double>() < 1.0);

  CHECK(run_cli({"bf", "--r2", "1.2", "--n", "60", "--k", "2"}).code == 2);
}

TEST_CASE("simulate is deterministic across thread counts", "[cli]") {
  const fs::path dir = temp_dir("simdet");
  const fs::path cfg = dir / "mini.cfg";
  {
    std::ofstream f(cfg);
    f << "replicates = 200\nseed = 31415\ndeltas = [0.05, 0.10]\n"
      << "bf_thresholds = [3]\n"
      << "scenario { name = \"a\", n = 24, k = 2, beta = [0.0, 0.2, 0.3], sigma_sq = 1.0 }\n"
      << "scenario { name = \"b\", n = 20, k = 4, beta = [0.0, 0.0, 0.0, 0.0, 0.0], sigma_sq = 1.0 }\n";
  }
  const fs::path out1 = dir / "t1";
  const fs::path out8 = dir / "t8";
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", out1.string(),
                   "--threads", "1"}).code == 0);
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", out8.string(),
                   "--threads", "8"}).code == 0);
  const std::string csv1 = slurp(out1 / "results.csv");
  const std::string csv8 = slurp(out8 / "results.csv");
  REQUIRE_FALSE(csv1.empty());
  CHECK(csv1 == csv8);
  CHECK(fs::exists(out1 / "manifest.json"));

  // rerun with the same seed: byte-identical again
  const fs::path out1b = dir / "t1b";
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", out1b.string(),
                   "--threads", "1"}).code == 0);
  CHECK(slurp(out1b / "results.csv") == csv1);

  // agree reads the results back
  const auto agree = run_cli({"agree", "--in", out1.string(), "--delta", "0.05",
                              "--threshold", "3"});
  REQUIRE(agree.code == 0);
  const double a = agree.report["results"]["agreement"].get<double>();
  CHECK(a >= 0.0);
  CHECK(a <= 1.0);
  CHECK(run_cli({"agree", "--in", out1.string(), "--delta", "0.33",
                 "--threshold", "3"}).code == 2);

  // bad configs are usage errors
  const fs::path broken = dir / "broken.cfg";
  std::ofstream(broken) << "scenario { n = 10 }\n";
  CHECK(run_cli({"simulate", broken.string()}).code == 2);
  CHECK(run_cli({"simulate", (dir / "missing.cfg").string()}).code == 2);
}

TEST_CASE("regions emits decision-region curve points", "[cli]") {
  const fs::path dir = temp_dir("regions");
  const fs::path out = dir / "fig.csv";
  const auto r = run_cli({"regions", "--k", "12", "--n-lo", "30", "--n-hi",
                          "40", "--n-points", "3", "--r2-lo", "0.12",
                          "--r2-hi", "0.25", "--r2-points", "5", "--delta",
                          "0.10", "--out", out.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out);
  REQUIRE_FALSE(csv.empty());
  // small-sample upward bias of R^2: negative conclusions occur at
  // observed R^2 above the margin
  bool saw_negative_above_delta = false;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    REQUIRE(f.size() == 10);
    if (std::stod(f[2]) > 0.10 && f[6] == "negative") saw_negative_above_delta = true;
  }
  CHECK(saw_negative_above_delta);
}

TEST_CASE("human output renders three significant figures", "[cli]") {
  const auto r = run_cli({"--human", "test", "regression", "--r2", "0.000216",
                          "--n", "4580", "--k", "2", "--delta", "0.01"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("CET decision: negative") != std::string::npos);
  CHECK(r.out.find("1.13e-09") != std::string::npos);
  CHECK(r.report.is_null());
}

TEST_CASE("version and schema stability", "[cli]") {
  const auto v = run_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(omnibus::kVersion) != std::string::npos);

  const auto r = run_cli({"power", "--n", "100", "--k", "2", "--delta", "0.05"});
  REQUIRE(r.code == 0);
  CHECK(r.report.contains("command"));
  CHECK(r.report.contains("version"));
  CHECK(r.report.contains("inputs"));
  CHECK(r.report.contains("results"));
  CHECK(r.report.contains("warnings"));
}
