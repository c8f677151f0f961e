#ifndef OMNIBUS_INPUT_TABLE_HPP
#define OMNIBUS_INPUT_TABLE_HPP

#include <fstream>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnibus {

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A strict comma-separated table: header row required, equal-width rows,
/// no empty cells. Offending rows are reported by number.
class InputTable {
 public:
  static InputTable read_csv(std::istream& in, const std::string& source) {
    InputTable t;
    t.source_ = source;
    std::string line;
    if (!std::getline(in, line) || line.empty()) {
      throw InputError(source + ": empty input, expected a CSV header row");
    }
    strip_cr(line);
    t.names_ = split(line);
    for (std::size_t c = 0; c < t.names_.size(); ++c) {
      if (t.names_[c].empty()) {
        throw InputError(source + ": header has an empty column name (column " +
                         std::to_string(c + 1) + ")");
      }
    }
    t.cells_.resize(t.names_.size());
    int row_no = 1;
    while (std::getline(in, line)) {
      ++row_no;
      strip_cr(line);
      if (line.empty()) continue;
      const auto fields = split(line);
      if (fields.size() != t.names_.size()) {
        throw InputError(source + ": row " + std::to_string(row_no) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(t.names_.size()));
      }
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c].empty()) {
          throw InputError(source + ": row " + std::to_string(row_no) +
                           ": missing value in column '" + t.names_[c] + "'");
        }
        t.cells_[c].push_back(fields[c]);
      }
      ++t.n_rows_;
    }
    if (t.n_rows_ == 0) {
      throw InputError(source + ": no data rows");
    }
    return t;
  }

  static InputTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);
    return read_csv(in, path);
  }

  std::size_t n_rows() const { return n_rows_; }
  const std::vector<std::string>& column_names() const { return names_; }

  const std::vector<std::string>& text_column(const std::string& name) const {
    return cells_[index_of(name)];
  }

  std::vector<double> numeric_column(const std::string& name) const {
    const auto& raw = cells_[index_of(name)];
    std::vector<double> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(raw[i], &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != raw[i].size()) {
        throw InputError(source_ + ": row " + std::to_string(i + 2) +
                         ": column '" + name + "' is not numeric: '" + raw[i] + "'");
      }
      out.push_back(v);
    }
    return out;
  }

  /// Splits a numeric outcome by the levels of a categorical column,
  /// in order of first appearance.
  std::map<std::string, std::vector<double>> group_numeric(
      const std::string& value_col, const std::string& group_col) const {
    const auto values = numeric_column(value_col);
    const auto& groups = text_column(group_col);
    std::map<std::string, std::vector<double>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[groups[i]].push_back(values[i]);
    }
    return out;
  }

 private:
  std::size_t index_of(const std::string& name) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (names_[c] == name) return c;
    }
    throw InputError(source_ + ": no column named '" + name + "'");
  }

  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    return fields;
  }

  std::string source_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> cells_;  // column-major
  std::size_t n_rows_ = 0;
};

}  // namespace omnibus

#endif  // OMNIBUS_INPUT_TABLE_HPP
