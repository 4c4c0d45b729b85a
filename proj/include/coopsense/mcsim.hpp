#pragma once

// Monte Carlo evaluation of the detectors.
//
// Samples are generated in fixed-size chunks; chunk k of a run seeded with
// `seed` for hypothesis h always draws from the substream
// (seed, h, k). Serial and OpenMP kernels therefore produce identical
// statistic vectors and identical integer counts for any thread count.

#include <cstdint>
#include <vector>

#include "coopsense/rng.hpp"
#include "coopsense/statistics.hpp"

namespace coopsense {

enum class Hypothesis { h0 = 0, h1 = 1 };
enum class Side { above, below };

inline constexpr std::int64_t kMcChunk = 1024;
inline constexpr std::int64_t kDefaultMcSamples = 100000;

struct McEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Binomial standard error sqrt(p (1 - p) / n).
double binomial_stderr(double p_hat, std::int64_t n_samples);

MeasurementBatch sample_batch(const HypothesisModel& model, Hypothesis hyp,
                              Rng& rng);

/// Draws `n_samples` batches and returns the statistic of each, in chunk
/// order.
std::vector<double> sample_statistics(StatisticKind kind,
                                      const HypothesisModel& model,
                                      Hypothesis hyp, std::int64_t n_samples,
                                      std::uint64_t seed,
                                      Execution exec = Execution::parallel);

/// Number of sampled statistics strictly on `side` of tau.
std::int64_t count_tail(StatisticKind kind, const HypothesisModel& model,
                        Hypothesis hyp, double tau, Side side,
                        std::int64_t n_samples, std::uint64_t seed,
                        Execution exec = Execution::parallel);

McEstimate estimate_tail_mc(StatisticKind kind, const HypothesisModel& model,
                            Hypothesis hyp, double tau, Side side,
                            std::int64_t n_samples, std::uint64_t seed,
                            Execution exec = Execution::parallel);

/// The ceil(beta n)-th smallest H1 statistic (no interpolation). Requires
/// beta * n_samples >= 100.
double empirical_threshold(StatisticKind kind, const HypothesisModel& model,
                           double beta, std::int64_t n_samples,
                           std::uint64_t seed,
                           Execution exec = Execution::parallel);

}  // namespace coopsense
