#pragma once

// Detection statistics evaluated at the fusion center.
//
// A batch holds y_ji (sensor j, time slot i) as an n x m matrix; its
// column-major storage is the stacked vector y = [y_1; ...; y_m], which is
// the vectorization every QuadraticForm refers to.

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coopsense/scenario.hpp"

namespace coopsense {

enum class StatisticKind { llr, gllr, qm, lm };

std::string_view to_string(StatisticKind kind);
/// Accepts "llr", "gllr", "qm", "lm" (case-insensitive).
StatisticKind parse_statistic(std::string_view name);

class MeasurementBatch {
public:
  explicit MeasurementBatch(Eigen::MatrixXd values);

  int n() const { return static_cast<int>(values_.rows()); }
  int m() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  auto slot(int i) const { return values_.col(i); }
  Eigen::Map<const Eigen::VectorXd> stacked() const {
    return {values_.data(), values_.size()};
  }

private:
  Eigen::MatrixXd values_;
};

/// T(y) = y^T A y + y^T b + c over the stacked nm-vector.
struct QuadraticForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double c = 0.0;

  Eigen::Index dim() const { return b.size(); }
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

/// A quadratic form with the time-slot block structure shared by the
/// LLR, QM and LM statistics:
///   A = I_m (x) within + J_m (x) across,   b = 1_m (x) slot_linear,
/// where J_m is the all-ones m x m matrix.
struct SlotQuadraticForm {
  int m = 1;
  Eigen::MatrixXd within;
  Eigen::MatrixXd across;
  Eigen::VectorXd slot_linear;
  double c = 0.0;

  int n() const { return static_cast<int>(slot_linear.size()); }
  QuadraticForm to_dense() const;
};

double qm_statistic(const MeasurementBatch& batch);
double lm_statistic(const MeasurementBatch& batch);

/// (1/nm) log p1(y; mu, Sigma1) / p0(y) with the true model parameters.
double llr_statistic(const MeasurementBatch& batch,
                     const HypothesisModel& model);

/// Generalized LLR with ML plug-ins for the H1 mean and covariance shape.
/// The normalized shape estimate is Sigma1_hat / sigma1^2; when the sample
/// covariance is rank deficient (always the case for m <= n) it is loaded
/// with 1e-6 (tr(Sigma1_hat)/n + sigma1^2) on the diagonal.
double gllr_statistic(const MeasurementBatch& batch, double sigma0_sq,
                      double sigma1_sq);

/// Dispatches on kind; `model` supplies the known variances for GLLR.
double evaluate_statistic(StatisticKind kind, const MeasurementBatch& batch,
                          const HypothesisModel& model);

SlotQuadraticForm slot_quadratic_form(StatisticKind kind,
                                      const HypothesisModel& model);
QuadraticForm quadratic_form(StatisticKind kind, const HypothesisModel& model);

// Two-stage evaluation: each SU reduces its m readings to one scalar, the
// fusion center combines the n scalars. Both stages accumulate left to
// right, which is also the order used by qm_statistic / lm_statistic, so the
// two paths agree bit for bit.
std::vector<double> su_summaries(StatisticKind kind,
                                 const MeasurementBatch& batch);
double fuse_summaries(StatisticKind kind, std::span<const double> summaries);
double distributed_evaluate(StatisticKind kind, const MeasurementBatch& batch);

}  // namespace coopsense
