#include "comboreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace comboreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_finite(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path.string() + "'", 0, 0);
  return in;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  long lineno = 0;
  if (!std::getline(is, line)) throw CsvError("missing header row", 1, 1);
  ++lineno;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  for (auto& name : split(trim(line), ',')) table.header.push_back(trim(name));
  const auto width = static_cast<long>(table.header.size());
  if (width == 0 || (width == 1 && table.header[0].empty())) throw CsvError("empty header row", 1, 1);

  std::vector<double> data;
  long rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (static_cast<long>(fields.size()) != width)
      throw CsvError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()), lineno,
                     std::min<long>(static_cast<long>(fields.size()), width) + 1);
    for (long c = 0; c < width; ++c) {
      double v = 0;
      if (!parse_finite(fields[static_cast<std::size_t>(c)], v))
        throw CsvError("not a finite number: '" + trim(fields[static_cast<std::size_t>(c)]) + "'", lineno, c + 1);
      data.push_back(v);
    }
    ++rows;
  }
  table.values.resize(rows, width);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < width; ++c) table.values(r, c) = data[static_cast<std::size_t>(r * width + c)];
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_csv(in);
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.values.cols() != 1) throw CsvError("expected a single column in '" + path.string() + "'", 1, 2);
  return t.values.col(0);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) os << (c ? "," : "") << format_double(values(r, c));
    os << '\n';
  }
}

KeyValues parse_config(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = {trim(line.substr(eq + 1)), lineno};
  }
  return kv;
}

KeyValues parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

const std::vector<std::pair<std::string, std::string>>& study_config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"n", "sample size"},
      {"p", "number of covariates"},
      {"rho", "AR(1) correlation of the design rows, in [0, 1)"},
      {"sigma", "noise standard deviation"},
      {"reps", "number of replicates"},
      {"seed", "64-bit master seed"},
      {"methods", "comma list of lasso, l1_scad, l1_hard, l1_sica, l1_mcp, oracle"},
      {"beta0", "comma list of leading coefficients, zero-padded to p (default: 1,-0.5,0.7,-1.2,-0.9,0.3,0.55)"},
      {"test_mode", "analytic or sampled"},
      {"test_size", "test-set size for sampled prediction error"},
      {"grid_size", "number of lambda grid points per path"},
      {"min_ratio", "smallest lambda as a fraction of lambda_max"},
      {"folds", "cross-validation folds for the lasso initializer"},
      {"tol", "coordinate-change convergence tolerance"},
      {"max_iter", "maximum coordinate sweeps per fit"},
      {"c_multipliers", "comma list m; lambda0 candidates are m * sigma_hat * sqrt(log(max(n,p))/n)"},
      {"c", "fixed universal constant; lambda0 = c * sqrt(log(max(n,p))/n)"},
      {"lambda0", "fixed L1 level"},
      {"noise_c", "constant for the noise-event level (default 2 * sigma)"},
      {"scad_shape", "SCAD a (default 3.7)"},
      {"mcp_shape", "MCP a (default 3)"},
      {"sica_shape", "SICA a (default 0.1)"},
      {"threads", "worker threads"},
  };
  return keys;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : split(text, ',')) {
    double v = 0;
    if (!parse_finite(field, v)) throw ConfigError("not a finite number: '" + trim(field) + "'");
    out.push_back(v);
  }
  return out;
}

SimConfig sim_config_from(const KeyValues& kv, SimConfig base) {
  for (const auto& [key, entry] : kv) {
    const auto& keys = study_config_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; }))
      throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(entry.line) + ")");
  }
  auto number = [&](const std::string& key) {
    double v = 0;
    if (!parse_finite(kv.at(key).value, v)) throw ConfigError("config key '" + key + "': not a finite number");
    return v;
  };
  auto integer = [&](const std::string& key) -> long long {
    const std::string t = trim(kv.at(key).value);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ConfigError("config key '" + key + "': not an integer");
    return v;
  };
  auto has = [&](const char* key) { return kv.count(key) > 0; };

  const Index old_p = base.p;
  if (has("n")) base.n = integer("n");
  if (has("p")) base.p = integer("p");
  if (has("rho")) base.rho = number("rho");
  if (has("sigma")) base.sigma = number("sigma");
  if (has("reps")) base.reps = integer("reps");
  if (has("seed")) {
    const std::string t = trim(kv.at("seed").value);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ConfigError("config key 'seed': not an unsigned integer");
    base.seed = v;
  }
  if (has("methods")) {
    base.methods.clear();
    for (const auto& name : split(kv.at("methods").value, ',')) {
      const std::string m = trim(name);
      if (m.empty()) continue;
      try {
        base.methods.push_back(parse_method(m));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'methods': ") + e.what());
      }
    }
    if (base.methods.empty()) throw ConfigError("config key 'methods': empty method list");
  }
  if (base.p < 2) throw ConfigError("config key 'p': must be >= 2");
  if (has("beta0")) {
    const auto head = parse_double_list(kv.at("beta0").value);
    if (static_cast<Index>(head.size()) > base.p) throw ConfigError("config key 'beta0': longer than p");
    base.beta0 = Eigen::VectorXd::Zero(base.p);
    for (std::size_t j = 0; j < head.size(); ++j) base.beta0(static_cast<Index>(j)) = head[j];
  } else if (base.p != old_p || base.beta0.size() != base.p) {
    base.beta0 = table1_beta0(base.p);
  }
  if (has("test_mode")) {
    const std::string mode = trim(kv.at("test_mode").value);
    if (mode == "analytic") base.test_mode.sampled = false;
    else if (mode == "sampled") base.test_mode.sampled = true;
    else throw ConfigError("config key 'test_mode': expected analytic or sampled");
  }
  if (has("test_size")) base.test_mode.size = integer("test_size");
  if (has("grid_size")) base.tuning.grid_size = integer("grid_size");
  if (has("min_ratio")) base.tuning.min_ratio = number("min_ratio");
  if (has("folds")) base.tuning.folds = static_cast<int>(integer("folds"));
  if (has("tol")) base.tuning.solver.tol = number("tol");
  if (has("max_iter")) base.tuning.solver.max_iter = static_cast<int>(integer("max_iter"));
  if (has("c_multipliers")) base.tuning.c_multipliers = parse_double_list(kv.at("c_multipliers").value);
  if (has("c")) base.tuning.fixed_c = number("c");
  if (has("lambda0")) base.tuning.fixed_lambda0 = number("lambda0");
  if (has("noise_c")) base.noise_c = number("noise_c");
  if (has("scad_shape")) base.scad_shape = number("scad_shape");
  if (has("mcp_shape")) base.mcp_shape = number("mcp_shape");
  if (has("sica_shape")) base.sica_shape = number("sica_shape");
  if (has("threads")) base.threads = static_cast<int>(integer("threads"));
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return base;
}

}  // namespace comboreg
