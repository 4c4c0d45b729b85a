#include "coopsense/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "coopsense/calibrate.hpp"
#include "coopsense/errors.hpp"
#include "coopsense/mcsim.hpp"

namespace coopsense {

namespace {

constexpr std::uint64_t kPlacementTag = 0x706c6163;  // "plac"
constexpr std::uint64_t kMonteCarloTag = 0x6d6f6e74;  // "mont"

struct Cell {
  std::optional<RealizationOutcome> outcome;
};

NoiseParams noise_for(const ExperimentConfig& config, double alpha) {
  return NoiseParams{config.sigma0_sq, alpha * config.sigma0_sq,
                     config.decorr_distance};
}

}  // namespace

RealizationOutcome evaluate_pmo(StatisticKind kind, const HypothesisModel& model,
                                double beta, std::int64_t mc_samples,
                                std::uint64_t mc_seed) {
  if (kind != StatisticKind::gllr)
    return {evaluate_realization(model, kind, beta).p_mo(), 0.0};

  const double tau = empirical_threshold(kind, model, beta, mc_samples, mc_seed,
                                         Execution::serial);
  const McEstimate est =
      estimate_tail_mc(kind, model, Hypothesis::h0, tau, Side::above,
                       mc_samples, mc_seed, Execution::serial);
  return {est.p_hat, est.std_error};
}

std::vector<Placement> draw_placements(const ExperimentConfig& config) {
  std::vector<Placement> out;
  out.reserve(static_cast<std::size_t>(config.n_placements));
  for (int p = 0; p < config.n_placements; ++p) {
    Rng rng = make_stream(config.seed,
                          {kPlacementTag, static_cast<std::uint64_t>(p)});
    out.push_back(sample_placement(rng, config.n, config.square_edge,
                                   config.pt_distance));
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, Execution exec) {
  config.validate();

  std::vector<double> alphas = config.alpha_grid;
  std::sort(alphas.begin(), alphas.end());
  std::vector<StatisticKind> kinds = config.statistics;
  std::sort(kinds.begin(), kinds.end());

  const std::vector<Placement> placements = draw_placements(config);
  const auto n_alpha = static_cast<std::int64_t>(alphas.size());
  const auto n_place = static_cast<std::int64_t>(placements.size());
  const auto n_kind = static_cast<std::int64_t>(kinds.size());

  // cells[(k * n_alpha + a) * n_place + p]
  std::vector<Cell> cells(static_cast<std::size_t>(n_kind * n_alpha * n_place));

  auto run_task = [&](std::int64_t task) {
    const std::int64_t a = task / n_place;
    const std::int64_t p = task % n_place;
    const HypothesisModel model = build_hypothesis_model(
        placements[static_cast<std::size_t>(p)], config.propagation,
        noise_for(config, alphas[static_cast<std::size_t>(a)]), config.m);
    const std::uint64_t mc_seed =
        derive_seed(config.seed, {kMonteCarloTag, static_cast<std::uint64_t>(a),
                                  static_cast<std::uint64_t>(p)});
    for (std::int64_t k = 0; k < n_kind; ++k) {
      auto& cell = cells[static_cast<std::size_t>((k * n_alpha + a) * n_place + p)];
      try {
        cell.outcome = evaluate_pmo(kinds[static_cast<std::size_t>(k)], model,
                                    config.beta, config.mc_samples, mc_seed);
      } catch (const DegenerateThreshold&) {
      } catch (const UnreachableThreshold&) {
      } catch (const NumericError&) {
      }
    }
  };

  const std::int64_t tasks = n_alpha * n_place;
  if (exec == Execution::serial) {
    for (std::int64_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < tasks; ++t) {
      try {
        run_task(t);
      } catch (...) {
#pragma omp critical(coopsense_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<SweepRow> rows;
  std::string over_budget;
  for (std::int64_t k = 0; k < n_kind; ++k) {
    for (std::int64_t a = 0; a < n_alpha; ++a) {
      SweepRow row;
      row.statistic = kinds[static_cast<std::size_t>(k)];
      row.alpha = alphas[static_cast<std::size_t>(a)];
      double sum = 0.0;
      double last_se = 0.0;
      std::vector<double> values;
      for (std::int64_t p = 0; p < n_place; ++p) {
        const auto& cell =
            cells[static_cast<std::size_t>((k * n_alpha + a) * n_place + p)];
        if (!cell.outcome) {
          ++row.n_excluded;
          continue;
        }
        values.push_back(cell.outcome->p_mo);
        sum += cell.outcome->p_mo;
        last_se = cell.outcome->std_error;
      }
      row.n_placements = static_cast<int>(values.size());
      if (!values.empty()) {
        const double count = static_cast<double>(values.size());
        row.p_mo_mean = sum / count;
        if (values.size() > 1) {
          double ss = 0.0;
          for (double v : values) ss += (v - row.p_mo_mean) * (v - row.p_mo_mean);
          row.p_mo_stderr = std::sqrt(ss / (count - 1.0) / count);
        } else {
          row.p_mo_stderr = last_se;
        }
      }
      if (row.n_excluded * 10 > config.n_placements) {
        char buf[160];
        std::snprintf(buf, sizeof buf, " %s@alpha=%.4g (%d of %d excluded)",
                      std::string(to_string(row.statistic)).c_str(), row.alpha,
                      row.n_excluded, config.n_placements);
        over_budget += buf;
      }
      rows.push_back(row);
    }
  }
  if (!over_budget.empty())
    throw ExclusionBudgetExceeded("exclusion budget exceeded:" + over_budget);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
               std::uint64_t seed) {
  out << kCsvHeader << '\n';
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.8e,%.8e,%.8e,%d,%d,%llu\n",
                  std::string(to_string(row.statistic)).c_str(), row.alpha,
                  row.p_mo_mean, row.p_mo_stderr, row.n_placements,
                  row.n_excluded, static_cast<unsigned long long>(seed));
    out << buf;
  }
}

}  // namespace coopsense
