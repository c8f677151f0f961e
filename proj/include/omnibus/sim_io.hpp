#ifndef OMNIBUS_SIM_IO_HPP
#define OMNIBUS_SIM_IO_HPP

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "omnibus/simulation.hpp"

namespace omnibus {

namespace detail_io {

// shortest round-trip decimal form; keeps reruns byte-identical
inline std::string fmt(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail_io

inline constexpr const char* kResultsCsvHeader =
    "scenario,n_requested,n_effective,k,sigma_sq,true_p_squared,replicates,"
    "failures,seed,alpha,delta,threshold,noninf_reject_rate,noninf_reject_se,"
    "power_approx,cet_positive,cet_negative,cet_inconclusive,bf_positive,"
    "bf_negative,bf_inconclusive,agreement,contradiction";

/// One CSV row per (scenario, delta, threshold) cell; the threshold and
/// BF columns stay empty when a scenario ran without BF evaluation.
inline void write_results_csv(std::ostream& out,
                              std::span<const ScenarioResult> results) {
  using detail_io::fmt;
  out << kResultsCsvHeader << "\n";
  for (const auto& r : results) {
    const auto& sc = r.scenario;
    const std::size_t n_thr = sc.bf_thresholds.size();
    for (std::size_t d = 0; d < sc.delta_grid.size(); ++d) {
      const std::size_t thr_rows = n_thr == 0 ? 1 : n_thr;
      for (std::size_t t = 0; t < thr_rows; ++t) {
        out << sc.name << ',' << sc.n_obs << ',' << r.n_effective << ','
            << sc.k << ',' << fmt(sc.sigma_sq) << ',' << fmt(r.true_p2) << ','
            << sc.replicates << ',' << r.failures << ',' << sc.seed << ','
            << fmt(sc.alpha) << ',' << fmt(sc.delta_grid[d]) << ',';
        if (n_thr != 0) out << fmt(sc.bf_thresholds[t]);
        out << ',' << fmt(r.rejection_rate[d]) << ','
            << fmt(r.rate_se(r.rejection_rate[d])) << ','
            << fmt(r.power_approx[d]) << ',' << fmt(r.cet[d].positive) << ','
            << fmt(r.cet[d].negative) << ',' << fmt(r.cet[d].inconclusive)
            << ',';
        if (n_thr != 0) {
          const std::size_t idx = d * n_thr + t;
          out << fmt(r.bf[t].positive) << ',' << fmt(r.bf[t].negative) << ','
              << fmt(r.bf[t].inconclusive) << ',' << fmt(r.agreement[idx])
              << ',' << fmt(r.contradiction[idx]);
        } else {
          out << ",,,,";
        }
        out << "\n";
      }
    }
  }
}

/// The cells of a results CSV needed to re-aggregate agreement rates.
struct ResultsCsvRow {
  std::string scenario;
  std::int64_t replicates = 0;
  std::int64_t failures = 0;
  double delta = 0.0;
  bool has_threshold = false;
  double threshold = 0.0;
  double agreement = 0.0;
  double contradiction = 0.0;
};

inline std::vector<ResultsCsvRow> read_results_csv(std::istream& in) {
  std::vector<ResultsCsvRow> rows;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("results csv: empty file");
  }
  if (line.rfind("scenario,", 0) != 0) {
    throw std::runtime_error("results csv: unexpected header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
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
    if (f.size() < 23) {
      throw std::runtime_error("results csv: short row at line " + std::to_string(line_no));
    }
    ResultsCsvRow r;
    try {
      r.scenario = f[0];
      r.replicates = std::stoll(f[6]);
      r.failures = std::stoll(f[7]);
      r.delta = std::stod(f[10]);
      if (!f[11].empty()) {
        r.has_threshold = true;
        r.threshold = std::stod(f[11]);
        r.agreement = std::stod(f[21]);
        r.contradiction = std::stod(f[22]);
      }
    } catch (const std::exception&) {
      throw std::runtime_error("results csv: malformed row at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace omnibus

#endif  // OMNIBUS_SIM_IO_HPP
