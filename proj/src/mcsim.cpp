#include "coopsense/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "coopsense/errors.hpp"

namespace coopsense {

namespace {

std::int64_t chunk_count(std::int64_t n_samples) {
  return (n_samples + kMcChunk - 1) / kMcChunk;
}

// Fills out[first, last) with statistics drawn from the chunk's substream.
void fill_chunk(StatisticKind kind, const HypothesisModel& model,
                Hypothesis hyp, std::uint64_t seed, std::int64_t chunk,
                std::int64_t first, std::int64_t last, double* out) {
  Rng rng = make_stream(seed, {static_cast<std::uint64_t>(hyp),
                               static_cast<std::uint64_t>(chunk)});
  for (std::int64_t i = first; i < last; ++i)
    out[i] = evaluate_statistic(kind, sample_batch(model, hyp, rng), model);
}

std::int64_t count_chunk(StatisticKind kind, const HypothesisModel& model,
                         Hypothesis hyp, double tau, Side side,
                         std::uint64_t seed, std::int64_t chunk,
                         std::int64_t size) {
  Rng rng = make_stream(seed, {static_cast<std::uint64_t>(hyp),
                               static_cast<std::uint64_t>(chunk)});
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < size; ++i) {
    const double t =
        evaluate_statistic(kind, sample_batch(model, hyp, rng), model);
    hits += side == Side::above ? (t > tau) : (t < tau);
  }
  return hits;
}

}  // namespace

double binomial_stderr(double p_hat, std::int64_t n_samples) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_samples));
}

MeasurementBatch sample_batch(const HypothesisModel& model, Hypothesis hyp,
                              Rng& rng) {
  const int n = model.n();
  const int m = model.m();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(n, m);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);

  if (hyp == Hypothesis::h0) {
    z *= std::sqrt(model.sigma0_sq());
    return MeasurementBatch(std::move(z));
  }
  Eigen::MatrixXd y = model.cov_h1_factor().triangularView<Eigen::Lower>() * z;
  y.colwise() += model.mu();
  return MeasurementBatch(std::move(y));
}

std::vector<double> sample_statistics(StatisticKind kind,
                                      const HypothesisModel& model,
                                      Hypothesis hyp, std::int64_t n_samples,
                                      std::uint64_t seed, Execution exec) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  std::vector<double> out(static_cast<std::size_t>(n_samples));
  const std::int64_t chunks = chunk_count(n_samples);

  if (exec == Execution::serial) {
    for (std::int64_t k = 0; k < chunks; ++k)
      fill_chunk(kind, model, hyp, seed, k, k * kMcChunk,
                 std::min(n_samples, (k + 1) * kMcChunk), out.data());
    return out;
  }

  // Errors cannot leave an OpenMP region; capture the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < chunks; ++k) {
    try {
      fill_chunk(kind, model, hyp, seed, k, k * kMcChunk,
                 std::min(n_samples, (k + 1) * kMcChunk), out.data());
    } catch (...) {
#pragma omp critical(coopsense_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::int64_t count_tail(StatisticKind kind, const HypothesisModel& model,
                        Hypothesis hyp, double tau, Side side,
                        std::int64_t n_samples, std::uint64_t seed,
                        Execution exec) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  const std::int64_t chunks = chunk_count(n_samples);
  auto size_of = [&](std::int64_t k) {
    return std::min(n_samples, (k + 1) * kMcChunk) - k * kMcChunk;
  };

  std::int64_t hits = 0;
  if (exec == Execution::serial) {
    for (std::int64_t k = 0; k < chunks; ++k)
      hits += count_chunk(kind, model, hyp, tau, side, seed, k, size_of(k));
    return hits;
  }

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
  for (std::int64_t k = 0; k < chunks; ++k) {
    try {
      hits += count_chunk(kind, model, hyp, tau, side, seed, k, size_of(k));
    } catch (...) {
#pragma omp critical(coopsense_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return hits;
}

McEstimate estimate_tail_mc(StatisticKind kind, const HypothesisModel& model,
                            Hypothesis hyp, double tau, Side side,
                            std::int64_t n_samples, std::uint64_t seed,
                            Execution exec) {
  const std::int64_t hits =
      count_tail(kind, model, hyp, tau, side, n_samples, seed, exec);
  McEstimate out;
  out.n_samples = n_samples;
  out.seed = seed;
  out.p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
  out.std_error = binomial_stderr(out.p_hat, n_samples);
  return out;
}

double empirical_threshold(StatisticKind kind, const HypothesisModel& model,
                           double beta, std::int64_t n_samples,
                           std::uint64_t seed, Execution exec) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("interference level must lie in (0, 1)");
  if (beta * static_cast<double>(n_samples) < 100.0 - 1e-9)
    throw DomainError("too few samples to resolve the requested quantile");

  std::vector<double> stats =
      sample_statistics(kind, model, Hypothesis::h1, n_samples, seed, exec);
  const auto rank = static_cast<std::int64_t>(
      std::ceil(beta * static_cast<double>(n_samples) - 1e-9));
  auto nth = stats.begin() + (rank - 1);
  std::nth_element(stats.begin(), nth, stats.end());
  return *nth;
}

}  // namespace coopsense
