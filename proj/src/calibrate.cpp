#include "coopsense/calibrate.hpp"

#include <cmath>

#include "coopsense/errors.hpp"

namespace coopsense {

namespace {

constexpr double kLogTolerance = 1e-12;

}  // namespace

double CalibrationResult::p_mo() const { return std::exp(p_mo_log); }

double calibrate_threshold(const SpectralLmgf& h1, double beta) {
  if (!(beta > 0.0 && beta < 0.5))
    throw DomainError("interference level must lie in (0, 1/2)");
  const double var = h1.variance();
  if (!(var > 0.0)) throw DegenerateThreshold("statistic has zero variance");

  const double target = std::log(beta);
  const double edge = h1.domain().lo;
  const bool bounded = std::isfinite(edge);
  auto gap = [&](double s) { return h1.tail_at_saddle(s).log_prob - target; };

  // gap -> +inf as s -> 0-. Start from the Gaussian guess s = -z / sd and
  // move outward until the estimate drops below beta.
  double inner = 0.0;
  double outer = -std::sqrt(-2.0 * target) / std::sqrt(var);
  if (bounded && outer <= edge) outer = 0.5 * edge;
  double g_outer = 0.0;
  for (int iter = 0;; ++iter) {
    if (iter > 4000 || !std::isfinite(outer) || !h1.domain().contains(outer))
      throw UnreachableThreshold("interference level is not reachable");
    g_outer = gap(outer);
    if (g_outer <= 0.0) break;
    inner = outer;
    const double next = bounded ? 0.5 * (outer + edge) : 2.0 * outer;
    if (next == outer)
      throw UnreachableThreshold("interference level is not reachable");
    outer = next;
  }
  if (g_outer == 0.0) return h1.at(outer).first;

  // Illinois-modified regula falsi on [outer, inner]; the inner end is the
  // last probed point with gap > 0 (or s = 0, where gap is +inf).
  double a = outer;
  double fa = g_outer;
  double b = inner;
  double fb = inner == 0.0 ? std::numeric_limits<double>::infinity() : gap(inner);
  int side = 0;
  double s = a;
  for (int iter = 0; iter < 300; ++iter) {
    if (std::isfinite(fb)) {
      s = (a * fb - b * fa) / (fb - fa);
      if (!(s > a && s < b)) s = 0.5 * (a + b);
    } else {
      s = 0.5 * (a + b);
    }
    const double fs = gap(s);
    if (std::abs(fs) <= kLogTolerance || b - a <= 1e-15 * std::abs(a)) break;
    if (fs < 0.0) {
      a = s;
      fa = fs;
      if (side == -1 && std::isfinite(fb)) fb *= 0.5;
      side = -1;
    } else {
      b = s;
      fb = fs;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  if (std::abs(gap(s)) > 1e-8)
    throw NumericError("threshold calibration did not converge");
  return h1.at(s).first;
}

double calibrate_threshold(const QuadraticForm& qf, const GaussianMoments& h1,
                           double beta) {
  return calibrate_threshold(SpectralLmgf(qf, h1), beta);
}

double log_upper_probability(const SpectralLmgf& h0, double tau) {
  const double mean = h0.mean();
  const double tol = 1e-10 * std::max(1.0, std::abs(tau));
  if (tau > mean + tol)
    return std::min(std::log(0.5), h0.tail(tau, Tail::upper).log_prob);
  if (tau < mean - tol) {
    const double lower = std::min(0.5, h0.tail(tau, Tail::lower).probability());
    return std::log1p(-lower);
  }
  return std::log(0.5);
}

CalibrationResult evaluate_realization(const HypothesisModel& model,
                                       StatisticKind kind, double beta) {
  const SlotQuadraticForm qf = slot_quadratic_form(kind, model);
  const SpectralLmgf under_h1(qf, h1_moments(model));
  const SpectralLmgf under_h0(qf, h0_moments(model));

  CalibrationResult out;
  out.kind = kind;
  out.threshold = calibrate_threshold(under_h1, beta);
  out.p_int_log = under_h1.tail(out.threshold, Tail::lower).log_prob;
  out.p_mo_log = log_upper_probability(under_h0, out.threshold);
  return out;
}

}  // namespace coopsense
