#pragma once

// CSV interchange and flat key = value configuration files.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comboreg/simulate.hpp"

namespace comboreg {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, long line, long column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  long line() const { return line_; }
  long column() const { return column_; }

 private:
  long line_;
  long column_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Comma-separated, header row required, finite numerics only. Lines are
/// 1-based with the header on line 1.
CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::filesystem::path& path);

/// Single-column table as a vector.
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

/// %.17g formatting; finite doubles round-trip exactly.
std::string format_double(double x);

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

struct ConfigEntry {
  std::string value;
  int line = 0;
};
using KeyValues = std::map<std::string, ConfigEntry>;

/// `key = value` lines, `#` starts a comment, blank lines ignored.
KeyValues parse_config(std::istream& is);
KeyValues parse_config(const std::filesystem::path& path);

/// Keys accepted by sim_config_from, with a one-line description each.
const std::vector<std::pair<std::string, std::string>>& study_config_keys();

/// Applies entries on top of `base`; unknown keys throw ConfigError naming the key.
SimConfig sim_config_from(const KeyValues& kv, SimConfig base = {});

std::vector<double> parse_double_list(const std::string& text);

}  // namespace comboreg
