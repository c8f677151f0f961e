#ifndef OMNIBUS_SIM_CONFIG_HPP
#define OMNIBUS_SIM_CONFIG_HPP

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "omnibus/bayes.hpp"
#include "omnibus/rng.hpp"
#include "omnibus/simulation.hpp"

namespace omnibus {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A parsed scenario file: global defaults plus one Scenario per
/// `scenario { ... }` block. Globals may be overridden inside a block.
struct SimConfig {
  std::uint64_t seed = 0;
  std::vector<Scenario> scenarios;
};

namespace detail_config {

struct Value {
  std::string text;
  std::vector<std::string> list;
  bool is_list = false;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& s, int line) {
  const std::string t = trim(s);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + t + "'");
  }
  if (pos != t.size()) {
    throw ConfigError("line " + std::to_string(line) + ": trailing junk after number in '" + t + "'");
  }
  return v;
}

inline std::int64_t parse_int(const std::string& s, int line) {
  const double v = parse_number(s, line);
  const auto i = static_cast<std::int64_t>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + trim(s) + "'");
  }
  return i;
}

inline std::vector<double> parse_number_list(const Value& v) {
  std::vector<double> out;
  if (v.is_list) {
    for (const auto& item : v.list) out.push_back(parse_number(item, v.line));
  } else if (!trim(v.text).empty()) {
    out.push_back(parse_number(v.text, v.line));
  }
  return out;
}

// splits "k = v, k = v" respecting [...] brackets and quotes
inline std::vector<std::string> split_top_level(const std::string& s, char sep) {
  std::vector<std::string> parts;
  int depth = 0;
  bool quoted = false;
  std::string cur;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == sep && depth == 0) {
        parts.push_back(cur);
        cur.clear();
        continue;
      }
    }
    cur += c;
  }
  if (!trim(cur).empty()) parts.push_back(cur);
  return parts;
}

inline Value parse_value(const std::string& raw, int line) {
  Value v;
  v.line = line;
  std::string t = trim(raw);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') {
      throw ConfigError("line " + std::to_string(line) + ": unterminated list");
    }
    v.is_list = true;
    for (auto& item : split_top_level(t.substr(1, t.size() - 2), ',')) {
      const std::string it = trim(item);
      if (!it.empty()) v.list.push_back(it);
    }
    return v;
  }
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
    t = t.substr(1, t.size() - 2);
  }
  v.text = t;
  return v;
}

inline void parse_assignment(const std::string& s, int line,
                             std::map<std::string, Value>& into) {
  const std::size_t eq = s.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("line " + std::to_string(line) + ": expected 'key = value', got '" +
                      trim(s) + "'");
  }
  const std::string key = trim(s.substr(0, eq));
  if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
  into[key] = parse_value(s.substr(eq + 1), line);
}

inline double rscale_from(const Value& v) {
  const std::string t = trim(v.text);
  if (t == "medium") return kRscaleMedium;
  return parse_number(t, v.line);
}

}  // namespace detail_config

inline SimConfig parse_sim_config(std::istream& in) {
  using detail_config::Value;
  std::map<std::string, Value> globals;
  std::vector<std::map<std::string, Value>> scenario_maps;

  std::string line;
  int line_no = 0;
  std::string pending_block;
  int block_start_line = 0;
  bool in_block = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = detail_config::trim(line);
    if (t.empty()) continue;

    if (in_block) {
      const std::size_t close = t.find('}');
      if (close != std::string::npos) {
        pending_block += " " + t.substr(0, close);
        std::map<std::string, Value> m;
        for (auto& part : detail_config::split_top_level(pending_block, ',')) {
          if (!detail_config::trim(part).empty()) {
            detail_config::parse_assignment(part, block_start_line, m);
          }
        }
        scenario_maps.push_back(std::move(m));
        in_block = false;
        pending_block.clear();
      } else {
        pending_block += " " + t;
      }
      continue;
    }

    if (t.rfind("scenario", 0) == 0) {
      const std::size_t open = t.find('{');
      if (open == std::string::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": scenario needs '{'");
      }
      block_start_line = line_no;
      const std::size_t close = t.find('}', open);
      if (close != std::string::npos) {
        std::map<std::string, Value> m;
        for (auto& part : detail_config::split_top_level(
                 t.substr(open + 1, close - open - 1), ',')) {
          if (!detail_config::trim(part).empty()) {
            detail_config::parse_assignment(part, line_no, m);
          }
        }
        scenario_maps.push_back(std::move(m));
      } else {
        in_block = true;
        pending_block = t.substr(open + 1);
      }
      continue;
    }

    detail_config::parse_assignment(t, line_no, globals);
  }
  if (in_block) {
    throw ConfigError("line " + std::to_string(block_start_line) + ": unterminated scenario block");
  }
  if (scenario_maps.empty()) {
    throw ConfigError("config defines no scenarios");
  }

  SimConfig cfg;
  const auto lookup = [&](const std::map<std::string, Value>& local,
                          const std::string& key) -> const Value* {
    auto it = local.find(key);
    if (it != local.end()) return &it->second;
    it = globals.find(key);
    if (it != globals.end()) return &it->second;
    return nullptr;
  };

  if (const Value* v = lookup({}, "seed")) {
    cfg.seed = static_cast<std::uint64_t>(detail_config::parse_int(v->text, v->line));
  }

  for (std::size_t i = 0; i < scenario_maps.size(); ++i) {
    const auto& m = scenario_maps[i];
    Scenario sc;
    const auto required = [&](const std::string& key) -> const Value& {
      const Value* v = lookup(m, key);
      if (!v) throw ConfigError("scenario " + std::to_string(i + 1) + ": missing '" + key + "'");
      return *v;
    };
    sc.n_obs = detail_config::parse_int(required("n").text, required("n").line);
    sc.k = detail_config::parse_int(required("k").text, required("k").line);
    sc.beta = detail_config::parse_number_list(required("beta"));
    sc.sigma_sq = detail_config::parse_number(required("sigma_sq").text, required("sigma_sq").line);
    sc.delta_grid = detail_config::parse_number_list(required("deltas"));
    sc.replicates = detail_config::parse_int(required("replicates").text, required("replicates").line);
    if (const Value* v = lookup(m, "alpha")) {
      sc.alpha = detail_config::parse_number(v->text, v->line);
    }
    if (const Value* v = lookup(m, "bf_thresholds")) {
      sc.bf_thresholds = detail_config::parse_number_list(*v);
    }
    if (const Value* v = lookup(m, "bf_rscale")) {
      sc.bf_rscale = detail_config::rscale_from(*v);
    }
    if (const Value* v = lookup(m, "name")) {
      sc.name = v->text;
    } else {
      std::ostringstream name;
      name << "s" << (i + 1) << "_n" << sc.n_obs << "_k" << sc.k << "_v" << sc.sigma_sq;
      sc.name = name.str();
    }
    if (auto it = m.find("seed"); it != m.end()) {
      sc.seed = static_cast<std::uint64_t>(detail_config::parse_int(it->second.text, it->second.line));
    } else {
      sc.seed = derive_seed(cfg.seed, i);
    }
    try {
      sc.validate();
    } catch (const std::exception& e) {
      throw ConfigError("scenario " + std::to_string(i + 1) + " ('" + sc.name + "'): " + e.what());
    }
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

inline SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_sim_config(in);
}

}  // namespace omnibus

#endif  // OMNIBUS_SIM_CONFIG_HPP
