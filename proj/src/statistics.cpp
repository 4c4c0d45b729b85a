#include "coopsense/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "coopsense/errors.hpp"

namespace coopsense {

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::llr: return "llr";
    case StatisticKind::gllr: return "gllr";
    case StatisticKind::qm: return "qm";
    case StatisticKind::lm: return "lm";
  }
  return "?";
}

StatisticKind parse_statistic(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "llr") return StatisticKind::llr;
  if (lower == "gllr") return StatisticKind::gllr;
  if (lower == "qm") return StatisticKind::qm;
  if (lower == "lm") return StatisticKind::lm;
  throw UnsupportedKind("unknown statistic '" + std::string(name) + "'");
}

MeasurementBatch::MeasurementBatch(Eigen::MatrixXd values)
    : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw DomainError("batch needs n >= 1 and m >= 1");
  if (!values_.allFinite()) throw DomainError("batch has non-finite entries");
}

double QuadraticForm::evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (y.size() != dim()) throw DomainError("quadratic form dimension mismatch");
  return y.dot(a * y) + y.dot(b) + c;
}

QuadraticForm SlotQuadraticForm::to_dense() const {
  const int nn = n();
  const Eigen::Index dim = static_cast<Eigen::Index>(nn) * m;
  QuadraticForm qf;
  qf.a.resize(dim, dim);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      auto block = qf.a.block(i * nn, k * nn, nn, nn);
      block = across;
      if (i == k) block += within;
    }
  qf.b = slot_linear.replicate(m, 1);
  qf.c = c;
  return qf;
}

double qm_statistic(const MeasurementBatch& batch) {
  return fuse_summaries(StatisticKind::qm,
                        su_summaries(StatisticKind::qm, batch));
}

double lm_statistic(const MeasurementBatch& batch) {
  return fuse_summaries(StatisticKind::lm,
                        su_summaries(StatisticKind::lm, batch));
}

std::vector<double> su_summaries(StatisticKind kind,
                                 const MeasurementBatch& batch) {
  if (kind != StatisticKind::qm && kind != StatisticKind::lm)
    throw UnsupportedKind("only QM and LM have per-SU summaries");
  const auto& y = batch.values();
  const int n = batch.n();
  const int m = batch.m();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = y(j, i);
      acc += kind == StatisticKind::qm ? v * v : v;
    }
    out[static_cast<std::size_t>(j)] = acc / m;
  }
  return out;
}

double fuse_summaries(StatisticKind kind, std::span<const double> summaries) {
  if (kind != StatisticKind::qm && kind != StatisticKind::lm)
    throw UnsupportedKind("only QM and LM fuse per-SU summaries");
  if (summaries.empty()) throw DomainError("no summaries to fuse");
  double acc = 0.0;
  for (double s : summaries) acc += kind == StatisticKind::qm ? s : s * s;
  return acc / static_cast<double>(summaries.size());
}

double distributed_evaluate(StatisticKind kind, const MeasurementBatch& batch) {
  return fuse_summaries(kind, su_summaries(kind, batch));
}

double llr_statistic(const MeasurementBatch& batch,
                     const HypothesisModel& model) {
  const int n = batch.n();
  const int m = batch.m();
  if (n != model.n()) throw DomainError("model and batch disagree on n");

  const auto& lower = model.cov_h1_factor();
  // Whitened residuals: L^{-1}(y_i - mu) per slot.
  Eigen::MatrixXd centered = batch.values().colwise() - model.mu();
  lower.triangularView<Eigen::Lower>().solveInPlace(centered);
  const double mahal = centered.squaredNorm();
  const double energy = batch.values().squaredNorm();

  const double nm = static_cast<double>(n) * m;
  const double log_ratio = 0.5 * nm * std::log(model.sigma0_sq()) -
                           0.5 * m * model.log_det_cov_h1() - 0.5 * mahal +
                           energy / (2.0 * model.sigma0_sq());
  return log_ratio / nm;
}

double gllr_statistic(const MeasurementBatch& batch, double sigma0_sq,
                      double sigma1_sq) {
  const int n = batch.n();
  const int m = batch.m();
  if (m < 2) throw DomainError("GLLR needs at least two time slots");
  if (!(sigma0_sq > 0.0) || !(sigma1_sq > 0.0))
    throw DomainError("GLLR variances must be positive");

  const auto& y = batch.values();
  const Eigen::VectorXd mean = y.rowwise().mean();
  const Eigen::MatrixXd centered = y.colwise() - mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / m;

  Eigen::LLT<Eigen::MatrixXd> llt;
  if (m > n) llt.compute(cov);
  if (m <= n || llt.info() != Eigen::Success) {
    const double load = 1e-6 * (cov.trace() / n + sigma1_sq);
    cov.diagonal().array() += load;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw NumericError("sample covariance not factorizable after loading");
  }

  // Shape estimate S~ = cov / sigma1^2, so log|S~| = log|cov| - n log sigma1^2
  // and r^T S~^{-1} r = sigma1^2 r^T cov^{-1} r.
  Eigen::MatrixXd white = centered;
  llt.matrixL().solveInPlace(white);
  const double log_det_cov =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double log_det_shape = log_det_cov - n * std::log(sigma1_sq);
  const double quad_shape = sigma1_sq * white.squaredNorm();

  const double nm = static_cast<double>(n) * m;
  const double value = 0.5 * std::log(sigma0_sq / sigma1_sq) -
                       log_det_shape / (2.0 * n) -
                       (quad_shape - sigma1_sq / sigma0_sq * y.squaredNorm()) /
                           (2.0 * nm * sigma1_sq);
  if (!std::isfinite(value)) throw NumericError("GLLR evaluated to non-finite");
  return value;
}

double evaluate_statistic(StatisticKind kind, const MeasurementBatch& batch,
                          const HypothesisModel& model) {
  switch (kind) {
    case StatisticKind::llr: return llr_statistic(batch, model);
    case StatisticKind::gllr:
      return gllr_statistic(batch, model.sigma0_sq(), model.sigma1_sq());
    case StatisticKind::qm: return qm_statistic(batch);
    case StatisticKind::lm: return lm_statistic(batch);
  }
  throw UnsupportedKind("unknown statistic kind");
}

SlotQuadraticForm slot_quadratic_form(StatisticKind kind,
                                      const HypothesisModel& model) {
  const int n = model.n();
  const int m = model.m();
  const double nm = static_cast<double>(n) * m;

  SlotQuadraticForm qf;
  qf.m = m;
  qf.within.setZero(n, n);
  qf.across.setZero(n, n);
  qf.slot_linear.setZero(n);
  qf.c = 0.0;

  switch (kind) {
    case StatisticKind::qm:
      qf.within.diagonal().setConstant(1.0 / nm);
      break;
    case StatisticKind::lm:
      qf.across.diagonal().setConstant(1.0 / (nm * m));
      break;
    case StatisticKind::llr: {
      Eigen::LLT<Eigen::MatrixXd> llt(model.cov_h1());
      const Eigen::MatrixXd prec =
          llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::VectorXd prec_mu = llt.solve(model.mu());
      qf.within = -0.5 * prec / nm;
      qf.within.diagonal().array() += 1.0 / (2.0 * model.sigma0_sq() * nm);
      qf.slot_linear = prec_mu / nm;
      qf.c = (0.5 * nm * std::log(model.sigma0_sq()) -
              0.5 * m * model.log_det_cov_h1() -
              0.5 * m * model.mu().dot(prec_mu)) /
             nm;
      break;
    }
    case StatisticKind::gllr:
      throw UnsupportedKind("GLLR has no quadratic-form representation");
  }
  return qf;
}

QuadraticForm quadratic_form(StatisticKind kind, const HypothesisModel& model) {
  return slot_quadratic_form(kind, model).to_dense();
}

}  // namespace coopsense
