#pragma once

#include "coopsense/statistics.hpp"
#include "coopsense/tailprob.hpp"

namespace coopsense {

struct CalibrationResult {
  StatisticKind kind = StatisticKind::qm;
  double threshold = 0.0;
  double p_int_log = 0.0;  // log P1(T < threshold)
  double p_mo_log = 0.0;   // log P0(T > threshold)

  double p_mo() const;
};

/// Threshold tau with P1(T < tau) = beta under the saddle-point estimate.
/// Solved in saddle space: s < 0 parametrizes tau(s) = mu'(s), and
/// log P(s) is monotone, so one scalar root gives both quantities.
double calibrate_threshold(const SpectralLmgf& h1, double beta);
double calibrate_threshold(const QuadraticForm& qf, const GaussianMoments& h1,
                           double beta);

/// P0(T > tau). Above the H0 mean this is the upper-tail estimate, below
/// it the complement of the lower-tail estimate. The leading term diverges
/// as tau approaches the mean, so either tail estimate is capped at 1/2;
/// the result is continuous and nonincreasing in tau.
double log_upper_probability(const SpectralLmgf& h0, double tau);

/// Calibrates against H1 and evaluates the missed-opportunity probability
/// under H0 for one realization of the scenario.
CalibrationResult evaluate_realization(const HypothesisModel& model,
                                       StatisticKind kind, double beta);

}  // namespace coopsense
