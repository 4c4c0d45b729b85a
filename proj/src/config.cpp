#include "coopsense/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "coopsense/errors.hpp"

namespace coopsense {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty())
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  return value;
}

std::vector<double> parse_alpha_grid(const std::string& text) {
  const std::string prefix = "logspace(";
  if (text.rfind(prefix, 0) == 0) {
    if (text.back() != ')') throw ConfigError("unterminated logspace(...)");
    const auto args =
        split(text.substr(prefix.size(), text.size() - prefix.size() - 1), ',');
    if (args.size() != 3)
      throw ConfigError("logspace needs three arguments: lo, hi, steps");
    return log_spaced_grid(parse_number<double>(args[0], "alpha_grid"),
                           parse_number<double>(args[1], "alpha_grid"),
                           parse_number<int>(args[2], "alpha_grid"));
  }
  std::vector<double> grid;
  for (const auto& item : split(text, ','))
    grid.push_back(parse_number<double>(item, "alpha_grid"));
  return grid;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : alpha_grid(log_spaced_grid(0.1, 10.0, 15)) {}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n < 1) fail("n must be at least 1");
  if (m < 1) fail("m must be at least 1");
  if (!(beta > 0.0 && beta < 0.5)) fail("beta must lie in (0, 0.5)");
  if (alpha_grid.empty()) fail("alpha_grid is empty");
  for (double a : alpha_grid)
    if (!(a > 0.0) || !std::isfinite(a)) fail("alpha values must be positive");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq))
    fail("sigma0_sq must be positive");
  if (n_placements < 1) fail("n_placements must be at least 1");
  if (mc_samples < 1) fail("mc_samples must be at least 1");
  if (statistics.empty()) fail("no statistics requested");
  if (std::set<StatisticKind>(statistics.begin(), statistics.end()).size() !=
      statistics.size())
    fail("statistics list has duplicates");
  const bool gllr = std::find(statistics.begin(), statistics.end(),
                              StatisticKind::gllr) != statistics.end();
  if (gllr && m < 2) fail("GLLR needs m >= 2");
  if (gllr && beta * static_cast<double>(mc_samples) < 100.0 - 1e-9)
    fail("mc_samples * beta must be at least 100 for GLLR");
  if (!(decorr_distance > 0.0)) fail("decorr_distance must be positive");
  if (!(square_edge >= 0.0)) fail("square_edge must be nonnegative");
  if (!(pt_distance > 0.0)) fail("pt_distance must be positive");
  try {
    propagation.validate();
  } catch (const DomainError& e) {
    fail(e.what());
  }
}

std::vector<double> log_spaced_grid(double lo, double hi, int steps) {
  if (!(lo > 0.0) || !(hi >= lo) || steps < 1)
    throw ConfigError("log grid needs 0 < lo <= hi and steps >= 1");
  if (steps == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(steps));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < steps; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::pow(10.0, a + (b - a) * i / (steps - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<StatisticKind> parse_statistic_list(const std::string& text) {
  std::vector<StatisticKind> out;
  for (const auto& item : split(text, ',')) {
    try {
      out.push_back(parse_statistic(item));
    } catch (const UnsupportedKind& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"n", [](auto& c, const auto& v) { c.n = parse_number<int>(v, "n"); }},
      {"m", [](auto& c, const auto& v) { c.m = parse_number<int>(v, "m"); }},
      {"beta",
       [](auto& c, const auto& v) { c.beta = parse_number<double>(v, "beta"); }},
      {"alpha_grid",
       [](auto& c, const auto& v) { c.alpha_grid = parse_alpha_grid(v); }},
      {"sigma0_sq",
       [](auto& c, const auto& v) {
         c.sigma0_sq = parse_number<double>(v, "sigma0_sq");
       }},
      {"n_placements",
       [](auto& c, const auto& v) {
         c.n_placements = parse_number<int>(v, "n_placements");
       }},
      {"mc_samples",
       [](auto& c, const auto& v) {
         c.mc_samples = parse_number<std::int64_t>(v, "mc_samples");
       }},
      {"seed",
       [](auto& c, const auto& v) {
         c.seed = parse_number<std::uint64_t>(v, "seed");
       }},
      {"statistics",
       [](auto& c, const auto& v) { c.statistics = parse_statistic_list(v); }},
      {"transmit_power_dbm",
       [](auto& c, const auto& v) {
         c.propagation.transmit_power_dbm =
             parse_number<double>(v, "transmit_power_dbm");
       }},
      {"antenna_const_db",
       [](auto& c, const auto& v) {
         c.propagation.antenna_const_db =
             parse_number<double>(v, "antenna_const_db");
       }},
      {"path_loss_exponent",
       [](auto& c, const auto& v) {
         c.propagation.path_loss_exponent =
             parse_number<double>(v, "path_loss_exponent");
       }},
      {"reference_distance",
       [](auto& c, const auto& v) {
         c.propagation.reference_distance =
             parse_number<double>(v, "reference_distance");
       }},
      {"detector_mean_dbm",
       [](auto& c, const auto& v) {
         c.propagation.detector_mean_dbm =
             parse_number<double>(v, "detector_mean_dbm");
       }},
      {"decorr_distance",
       [](auto& c, const auto& v) {
         c.decorr_distance = parse_number<double>(v, "decorr_distance");
       }},
      {"square_edge",
       [](auto& c, const auto& v) {
         c.square_edge = parse_number<double>(v, "square_edge");
       }},
      {"pt_distance",
       [](auto& c, const auto& v) {
         c.pt_distance = parse_number<double>(v, "pt_distance");
       }},
      {"output_path", [](auto& c, const auto& v) { c.output_path = v; }},
  };

  ExperimentConfig config = std::move(base);
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos)
      throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

}  // namespace coopsense
