#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "coopsense/scenario.hpp"
#include "coopsense/statistics.hpp"

namespace coopsense {

struct ExperimentConfig {
  int n = 10;
  int m = 10;
  double beta = 0.01;
  std::vector<double> alpha_grid;
  double sigma0_sq = 1.0;
  int n_placements = 200;
  std::int64_t mc_samples = 100000;
  std::uint64_t seed = 1;
  std::vector<StatisticKind> statistics = {
      StatisticKind::llr, StatisticKind::gllr, StatisticKind::qm,
      StatisticKind::lm};
  PropagationParams propagation;
  double decorr_distance = 0.14;
  double square_edge = 0.1;
  double pt_distance = 1.0;
  std::string output_path;

  ExperimentConfig();

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// `steps` points from lo to hi, equally spaced in log10 (endpoints exact).
std::vector<double> log_spaced_grid(double lo, double hi, int steps);

/// Parses `key = value` lines. Blank lines and text after '#' are ignored.
/// Unknown or repeated keys are errors. Keys not present keep the defaults.
ExperimentConfig parse_config(std::istream& in,
                              ExperimentConfig base = ExperimentConfig{});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Comma-separated statistic names, e.g. "llr,qm".
std::vector<StatisticKind> parse_statistic_list(const std::string& text);

}  // namespace coopsense
