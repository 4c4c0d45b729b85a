#include <omp.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "coopsense/errors.hpp"
#include "coopsense/sweep.hpp"

using namespace coopsense;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv_of(const ExperimentConfig& config, Execution exec) {
  std::ostringstream out;
  write_csv(out, run_sweep(config, exec), config.seed);
  return out.str();
}

ExperimentConfig small_analytic() {
  ExperimentConfig c;
  c.n_placements = 20;
  c.statistics = {StatisticKind::qm, StatisticKind::lm, StatisticKind::llr};
  return c;
}

}  // namespace

TEST_CASE("log-spaced grid") {
  const auto g = log_spaced_grid(0.1, 10.0, 15);
  REQUIRE(g.size() == 15);
  CHECK(g.front() == 0.1);
  CHECK(g.back() == 10.0);
  CHECK(g[7] == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 1; i + 1 < g.size(); ++i)
    CHECK(g[i + 1] / g[i] == doctest::Approx(g[1] / g[0]).epsilon(1e-12));
  CHECK(log_spaced_grid(2.0, 2.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(log_spaced_grid(0.0, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(log_spaced_grid(2.0, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(log_spaced_grid(1.0, 2.0, 0), ConfigError);
}

TEST_CASE("defaults") {
  const ExperimentConfig c;
  CHECK(c.n == 10);
  CHECK(c.m == 10);
  CHECK(c.beta == 0.01);
  CHECK(c.sigma0_sq == 1.0);
  CHECK(c.n_placements == 200);
  CHECK(c.mc_samples == 100000);
  CHECK(c.alpha_grid.size() == 15);
  CHECK(c.statistics.size() == 4);
  CHECK(c.decorr_distance == 0.14);
  CHECK(c.square_edge == 0.1);
  CHECK(c.pt_distance == 1.0);
  CHECK(c.propagation.transmit_power_dbm == 0.97);
  CHECK(c.propagation.path_loss_exponent == 3.3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("reference config file") {
  const auto c = load_config(COOPSENSE_SOURCE_DIR "/config/reference.conf");
  CHECK(c.n == 10);
  CHECK(c.m == 10);
  CHECK(c.beta == 0.01);
  CHECK(c.alpha_grid == log_spaced_grid(0.1, 10.0, 15));
  CHECK(c.statistics.size() == 4);
  CHECK(c.propagation.antenna_const_db == 0.0);
  CHECK(c.propagation.reference_distance == 1.0);
  CHECK(c.decorr_distance == 0.14);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(load_config("/nonexistent/x.conf"), ConfigError);
}

TEST_CASE("config grammar") {
  const auto c = parse(
      "# comment line\n"
      "\n"
      "  n = 4   # trailing comment\n"
      "m=3\n"
      "alpha_grid = 0.5, 1, 2e0\n"
      "statistics = QM , llr\n"
      "seed = 18446744073709551615\n"
      "output_path = out/run.csv\n"
      "path_loss_exponent = 2.5\r\n");
  CHECK(c.n == 4);
  CHECK(c.m == 3);
  CHECK(c.alpha_grid == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.statistics == std::vector<StatisticKind>{StatisticKind::qm, StatisticKind::llr});
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.output_path == "out/run.csv");
  CHECK(c.propagation.path_loss_exponent == 2.5);
  CHECK(c.beta == 0.01);  // untouched keys keep defaults

  const auto g = parse("alpha_grid = logspace(1, 100, 3)\n");
  CHECK(g.alpha_grid.size() == 3);
  CHECK(g.alpha_grid[1] == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("config errors") {
  auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("n = 3\nbogus = 1\n").find("line 2") != std::string::npos);
  CHECK(message("n = 3\nbogus = 1\n").find("unknown key 'bogus'") != std::string::npos);
  CHECK(message("n = 3\n\nn = 4\n").find("line 3: duplicate key 'n'") != std::string::npos);
  CHECK(message("just words\n").find("expected 'key = value'") != std::string::npos);
  CHECK(message("n = 10x\n").find("invalid value") != std::string::npos);
  CHECK(message("n = \n") != "no error");
  CHECK(message("beta = 0.01.2\n") != "no error");
  CHECK(message("seed = -1\n") != "no error");
  CHECK(message("statistics = qm, wald\n") != "no error");
  CHECK(message("alpha_grid = logspace(1, 2)\n").find("three arguments") != std::string::npos);
  CHECK(message("alpha_grid = logspace(1, 2, 3\n").find("unterminated") != std::string::npos);
  CHECK(message("alpha_grid = logspace(0, 2, 3)\n") != "no error");
}

TEST_CASE("validation") {
  auto invalid = [](auto edit) {
    ExperimentConfig c;
    edit(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  invalid([](auto& c) { c.n = 0; });
  invalid([](auto& c) { c.m = 0; });
  invalid([](auto& c) { c.beta = 0.5; });
  invalid([](auto& c) { c.beta = 0.0; });
  invalid([](auto& c) { c.alpha_grid = {1.0, -2.0}; });
  invalid([](auto& c) { c.alpha_grid.clear(); });
  invalid([](auto& c) { c.sigma0_sq = 0.0; });
  invalid([](auto& c) { c.n_placements = 0; });
  invalid([](auto& c) { c.statistics.clear(); });
  invalid([](auto& c) { c.statistics = {StatisticKind::qm, StatisticKind::qm}; });
  invalid([](auto& c) { c.m = 1; });                // GLLR needs two slots
  invalid([](auto& c) { c.mc_samples = 9999; });    // beta * n < 100 with GLLR
  invalid([](auto& c) { c.decorr_distance = 0.0; });
  invalid([](auto& c) { c.propagation.reference_distance = 0.0; });

  ExperimentConfig ok;
  ok.statistics = {StatisticKind::qm};
  ok.m = 1;
  ok.mc_samples = 1;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("placements depend only on seed and index") {
  ExperimentConfig a;
  a.n_placements = 5;
  ExperimentConfig b = a;
  b.n_placements = 8;
  b.alpha_grid = {3.0};
  const auto pa = draw_placements(a);
  const auto pb = draw_placements(b);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < a.n; ++k) {
      CHECK(pa[i].sus()[k].x == pb[i].sus()[k].x);
      CHECK(pa[i].sus()[k].y == pb[i].sus()[k].y);
    }
  b.seed = 2;
  CHECK(draw_placements(b)[0].sus()[0].x != pa[0].sus()[0].x);
}

TEST_CASE("analytic sweep rows") {
  const auto c = small_analytic();
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 15 * 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CHECK(r.p_mo_mean >= 0.0);
    CHECK(r.p_mo_mean <= 1.0);
    CHECK(r.p_mo_stderr >= 0.0);
    CHECK(r.n_placements + r.n_excluded == c.n_placements);
    if (i > 0) {
      const auto& q = rows[i - 1];
      CHECK((q.statistic < r.statistic || (q.statistic == r.statistic && q.alpha < r.alpha)));
    }
  }
  // LLR is the best detector at every grid point.
  for (std::size_t a = 0; a < 15; ++a) {
    const double llr = rows[a].p_mo_mean;
    const double qm = rows[15 + a].p_mo_mean;
    const double lm = rows[30 + a].p_mo_mean;
    CHECK(rows[a].statistic == StatisticKind::llr);
    CHECK(rows[15 + a].statistic == StatisticKind::qm);
    CHECK(rows[30 + a].statistic == StatisticKind::lm);
    CHECK(llr <= std::min(qm, lm));
  }
}

TEST_CASE("CSV layout") {
  auto c = small_analytic();
  c.n_placements = 3;
  c.alpha_grid = {0.5, 2.0};
  c.seed = 42;
  const std::string csv = csv_of(c, Execution::serial);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "statistic,alpha,p_mo_mean,p_mo_stderr,n_placements,n_excluded,seed");
  const std::regex sci("-?[0-9]\\.[0-9]{8}e[+-][0-9]{2,3}");
  const std::string num = "(-?[0-9]\\.[0-9]{8}e[+-][0-9]{2,3})";
  const std::regex row("(llr|qm|lm)," + num + "," + num + "," + num + ",3,0,42");
  int count = 0;
  while (std::getline(in, line)) {
    CHECK_MESSAGE(std::regex_match(line, row), line);
    ++count;
  }
  CHECK(count == 6);
}

TEST_CASE("sweep is deterministic across runs and thread counts") {
  auto c = small_analytic();
  c.n_placements = 12;
  const std::string serial = csv_of(c, Execution::serial);
  CHECK(csv_of(c, Execution::serial) == serial);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    CHECK(csv_of(c, Execution::parallel) == serial);
  }
  omp_set_num_threads(saved);
  c.seed = 2;
  CHECK(csv_of(c, Execution::serial) != serial);
}

TEST_CASE("GLLR Monte Carlo path is deterministic") {
  ExperimentConfig c;
  c.n = 4;
  c.m = 4;
  c.n_placements = 3;
  c.mc_samples = 10000;
  c.alpha_grid = {0.3, 3.0};
  c.statistics = {StatisticKind::gllr};
  const std::string serial = csv_of(c, Execution::serial);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  CHECK(csv_of(c, Execution::parallel) == serial);
  omp_set_num_threads(saved);
  const auto rows = run_sweep(c, Execution::serial);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.p_mo_mean >= 0.0);
    CHECK(r.p_mo_mean <= 1.0);
    CHECK(r.n_placements == 3);
  }
  c.n_placements = 1;
  const auto single = run_sweep(c, Execution::serial);
  // One placement: the reported error is the binomial Monte Carlo error.
  const double p = single[0].p_mo_mean;
  CHECK(single[0].p_mo_stderr == doctest::Approx(std::sqrt(p * (1 - p) / 10000)));
}

TEST_CASE("exclusions past ten percent fail the run") {
  // mu = 0 at every SU and alpha so small that Sigma1 rounds to sigma0^2 I:
  // the LLR is identically zero and its threshold is degenerate.
  ExperimentConfig c;
  c.n = 3;
  c.m = 2;
  c.n_placements = 5;
  c.square_edge = 0.0;
  c.propagation.detector_mean_dbm = c.propagation.transmit_power_dbm;
  c.alpha_grid = {1e-300};
  c.statistics = {StatisticKind::llr};
  CHECK_THROWS_AS(run_sweep(c, Execution::serial), ExclusionBudgetExceeded);
  CHECK_THROWS_AS(run_sweep(c, Execution::parallel), ExclusionBudgetExceeded);
  try {
    run_sweep(c);
  } catch (const ExclusionBudgetExceeded& e) {
    CHECK(std::string(e.what()).find("5 of 5 excluded") != std::string::npos);
  }

  // The same degenerate geometry is fine for QM.
  c.statistics = {StatisticKind::qm};
  const auto rows = run_sweep(c);
  CHECK(rows[0].n_excluded == 0);
}
