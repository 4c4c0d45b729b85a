#pragma once

// Average missed-opportunity probability versus alpha = sigma_SH^2 / sigma0^2.
//
// For every (alpha, placement) pair a model is built with
// sigma_SH^2 = alpha * sigma0^2, the threshold of each statistic is set so
// that P_int = beta, and P_mo is recorded. LLR, QM and LM use the
// saddle-point engine; GLLR uses Monte Carlo (empirical H1 quantile, then a
// fresh H0 sample). Placements are shared across the alpha grid.

#include <cstdint>
#include <ostream>
#include <vector>

#include "coopsense/config.hpp"
#include "coopsense/rng.hpp"

namespace coopsense {

struct SweepRow {
  StatisticKind statistic = StatisticKind::qm;
  double alpha = 0.0;
  double p_mo_mean = 0.0;
  double p_mo_stderr = 0.0;
  int n_placements = 0;  // realizations that entered the mean
  int n_excluded = 0;
};

/// Missed-opportunity probability of one realization; throws
/// DegenerateThreshold / UnreachableThreshold / NumericError when the
/// realization cannot be evaluated.
struct RealizationOutcome {
  double p_mo = 0.0;
  double std_error = 0.0;  // Monte Carlo error, zero on the analytic path
};

RealizationOutcome evaluate_pmo(StatisticKind kind, const HypothesisModel& model,
                                double beta, std::int64_t mc_samples,
                                std::uint64_t mc_seed);

std::vector<Placement> draw_placements(const ExperimentConfig& config);

/// Rows sorted by (statistic, alpha). Throws ExclusionBudgetExceeded when a
/// row loses more than 10% of its placements.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                Execution exec = Execution::parallel);

inline constexpr const char* kCsvHeader =
    "statistic,alpha,p_mo_mean,p_mo_stderr,n_placements,n_excluded,seed";

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               std::uint64_t seed);

}  // namespace coopsense
