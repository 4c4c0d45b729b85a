#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "coopsense/calibrate.hpp"
#include "coopsense/errors.hpp"
#include "coopsense/mcsim.hpp"

using namespace coopsense;

namespace {

constexpr double kZ01 = -2.3263478740408408;  // standard normal 1% quantile

SpectralLmgf h1_lmgf(StatisticKind kind, const HypothesisModel& model) {
  return SpectralLmgf(slot_quadratic_form(kind, model), h1_moments(model));
}

SpectralLmgf h0_lmgf(StatisticKind kind, const HypothesisModel& model) {
  return SpectralLmgf(slot_quadratic_form(kind, model), h0_moments(model));
}

}  // namespace

TEST_CASE("Gaussian scalar threshold is near the exact quantile") {
  for (int k : {1, 10, 100}) {
    for (double theta : {5.0, 20.0}) {
      QuadraticForm qf;
      qf.a = Eigen::MatrixXd::Zero(k, k);
      qf.b = Eigen::VectorXd::Constant(k, 1.0 / k);
      GaussianMoments mom{Eigen::VectorXd::Constant(k, theta), Eigen::MatrixXd::Identity(k, k)};
      const double tau = calibrate_threshold(qf, mom, 0.01);
      const double exact = theta + kZ01 / std::sqrt(k);
      CHECK(oracle::relative_error(tau, exact) < 0.02);
      CHECK(tau < exact);  // the leading term overstates a Gaussian tail
    }
  }
}

TEST_CASE("round trip reproduces log beta") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    for (double alpha : {0.1, 1.0, 10.0}) {
      const auto model = fixture::model(seed, alpha);
      for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
        const auto h1 = h1_lmgf(kind, model);
        for (double beta : {1e-4, 0.01, 0.2}) {
          const double tau = calibrate_threshold(h1, beta);
          CHECK(std::isfinite(tau));
          CHECK(std::abs(h1.tail(tau, Tail::lower).log_prob - std::log(beta)) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("larger beta gives a larger threshold") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto model = fixture::model(seed, 1.0);
    for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
      const auto h1 = h1_lmgf(kind, model);
      CHECK(calibrate_threshold(h1, 0.02) > calibrate_threshold(h1, 0.005));
    }
  }
}

TEST_CASE("beta outside (0, 1/2) is rejected") {
  const auto h1 = h1_lmgf(StatisticKind::qm, fixture::model(1, 1.0));
  for (double beta : {0.0, -0.1, 0.5, 0.7, std::nan("")})
    CHECK_THROWS_AS(calibrate_threshold(h1, beta), DomainError);
  CHECK_THROWS_AS(evaluate_realization(fixture::model(1, 1.0), StatisticKind::qm, 0.5),
                  DomainError);
}

TEST_CASE("evaluate_realization is deterministic") {
  const auto model = fixture::model(9, 2.0);
  for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
    const auto a = evaluate_realization(model, kind, 0.01);
    const auto b = evaluate_realization(model, kind, 0.01);
    CHECK(a.kind == kind);
    CHECK(a.threshold == b.threshold);
    CHECK(a.p_int_log == b.p_int_log);
    CHECK(a.p_mo_log == b.p_mo_log);
    CHECK(std::abs(a.p_int_log - std::log(0.01)) <= 1e-8);
    CHECK(a.p_mo() > 0.0);
    CHECK(a.p_mo() < 1.0);
  }
  CHECK_THROWS_AS(evaluate_realization(model, StatisticKind::gllr, 0.01), UnsupportedKind);
}

TEST_CASE("coinciding hypotheses give a degenerate LLR threshold") {
  // SUs on the unit circle receive exactly m0 when m0 = P_t + K.
  std::vector<Point> sus;
  for (int i = 0; i < 4; ++i) {
    const double t = 0.1 * i;
    sus.push_back({std::cos(t), std::sin(t)});
  }
  const Placement p({0.0, 0.0}, sus);
  PropagationParams prop;
  prop.detector_mean_dbm = prop.transmit_power_dbm + prop.antenna_const_db;
  const auto model = build_hypothesis_model(p, prop, {1.0, 0.0, 0.14}, 5);
  CHECK(model.mu().norm() < 1e-12);
  CHECK_THROWS_AS(evaluate_realization(model, StatisticKind::llr, 0.01), DegenerateThreshold);
}

TEST_CASE("missed opportunity is nonincreasing in beta") {
  const double betas[] = {1e-4, 1e-3, 0.005, 0.01, 0.05, 0.1, 0.3, 0.45};
  for (std::uint64_t seed = 11; seed <= 18; ++seed) {
    for (double alpha : {0.1, 0.5, 3.0, 10.0}) {
      const auto model = fixture::model(seed, alpha, 4 + seed % 7, 2 + seed % 9);
      for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
        double prev = 1.0;
        for (double beta : betas) {
          const double p = evaluate_realization(model, kind, beta).p_mo();
          CHECK(p <= prev * (1.0 + 1e-12));
          prev = p;
        }
      }
    }
  }
}

TEST_CASE("upper probability under H0 is continuous and monotone") {
  for (double alpha : {0.2, 5.0}) {
    const auto model = fixture::model(4, alpha);
    for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
      const auto h0 = h0_lmgf(kind, model);
      const double mean = h0.mean();
      const double sd = std::sqrt(h0.variance());
      CHECK(std::exp(log_upper_probability(h0, mean)) == doctest::Approx(0.5));
      double prev = -std::numeric_limits<double>::infinity();
      for (double z = 4.0; z >= -4.0; z -= 0.01) {
        double lp = 0.0;
        try {
          lp = log_upper_probability(h0, mean + z * sd);
        } catch (const UnreachableThreshold&) {
          continue;
        }
        CHECK(lp <= 0.0);
        CHECK(lp >= prev - 1e-12);
        prev = lp;
      }
      // Both sides meet at 1/2 without a jump.
      const double eps = 1e-7 * sd;
      CHECK(std::abs(std::exp(log_upper_probability(h0, mean + eps)) -
                     std::exp(log_upper_probability(h0, mean - eps))) < 1e-12);
    }
  }
}

TEST_CASE("calibrated threshold sits below the H1 mean") {
  for (std::uint64_t seed = 21; seed <= 30; ++seed) {
    for (double alpha : {0.1, 0.3, 1.0, 3.0, 10.0}) {
      const auto model = fixture::model(seed, alpha);
      for (auto kind : {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm}) {
        const auto h1 = h1_lmgf(kind, model);
        const auto h0 = h0_lmgf(kind, model);
        const double tau = evaluate_realization(model, kind, 0.01).threshold;
        CHECK(tau < h1.mean());
        // Above the H0 mean whenever the H1 bulk is well clear of it.
        if (h1.mean() - h0.mean() > 4.0 * std::sqrt(h1.variance())) CHECK(tau > h0.mean());
      }
    }
  }
}

TEST_CASE("QM at alpha = 1 agrees with Monte Carlo") {
  // First placement whose P_mo is large enough for the sample size to resolve.
  std::uint64_t seed = 1;
  while (evaluate_realization(fixture::model(seed, 1.0), StatisticKind::qm, 0.01).p_mo() < 1e-4)
    ++seed;
  const auto model = fixture::model(seed, 1.0);
  const auto r = evaluate_realization(model, StatisticKind::qm, 0.01);
  const std::int64_t n = 200000;
  const auto p_int = estimate_tail_mc(StatisticKind::qm, model, Hypothesis::h1, r.threshold,
                                      Side::below, n, 5);
  const auto p_mo = estimate_tail_mc(StatisticKind::qm, model, Hypothesis::h0, r.threshold,
                                     Side::above, n, 6);
  MESSAGE("placement " << seed << ": P_int MC " << p_int.p_hat << "; P_mo analytic "
                       << r.p_mo() << ", MC " << p_mo.p_hat);
  CHECK(p_int.p_hat > 0.005);
  CHECK(p_int.p_hat < 0.02);
  CHECK(p_mo.p_hat > 0.5 * r.p_mo());
  CHECK(p_mo.p_hat < 2.0 * r.p_mo());
}
