#include "coopsense/tailprob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coopsense/errors.hpp"

namespace coopsense {

namespace {

// (log1p(x) - x / (1 + x)) / 2, the Legendre term of -1/2 log(1 + x),
// computed without cancellation for small |x|.
double legendre_log_term(double x) {
  if (std::abs(x) < 0.05) {
    double sum = 0.0;
    double power = x;
    for (int k = 2; k <= 18; ++k) {
      power *= x;
      const double term = static_cast<double>(k - 1) / k * power;
      sum += (k % 2 == 0) ? term : -term;
    }
    return 0.5 * sum;
  }
  return 0.5 * (std::log1p(x) - x / (1.0 + x));
}

Eigen::MatrixXd lower_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("covariance is not positive definite");
  return llt.matrixL();
}

Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& x) {
  return 0.5 * (x + x.transpose());
}

void check_dims(const QuadraticForm& qf, const GaussianMoments& mom) {
  const auto d = qf.dim();
  if (qf.a.rows() != d || qf.a.cols() != d || mom.mean.size() != d ||
      mom.cov.rows() != d || mom.cov.cols() != d)
    throw DomainError("quadratic form and moments have inconsistent dimensions");
}

}  // namespace

double TailResult::probability() const { return std::exp(log_prob); }

GaussianMoments SlotGaussianMoments::to_dense() const {
  const auto n = slot_mean.size();
  GaussianMoments out;
  out.mean = slot_mean.replicate(m, 1);
  out.cov.setZero(n * m, n * m);
  for (int i = 0; i < m; ++i) out.cov.block(i * n, i * n, n, n) = slot_cov;
  return out;
}

SlotGaussianMoments h0_moments(const HypothesisModel& model) {
  const int n = model.n();
  return {model.m(), Eigen::VectorXd::Zero(n),
          model.sigma0_sq() * Eigen::MatrixXd::Identity(n, n)};
}

SlotGaussianMoments h1_moments(const HypothesisModel& model) {
  return {model.m(), model.mu(), model.cov_h1()};
}

double quadratic_form_mean(const QuadraticForm& qf, const GaussianMoments& mom) {
  check_dims(qf, mom);
  return (mom.cov * qf.a).trace() + mom.mean.dot(qf.a * mom.mean) +
         qf.b.dot(mom.mean) + qf.c;
}

double quadratic_form_variance(const QuadraticForm& qf,
                               const GaussianMoments& mom) {
  check_dims(qf, mom);
  const Eigen::MatrixXd ca = mom.cov * qf.a;
  const Eigen::VectorXd am = qf.a * mom.mean;
  return 2.0 * (ca * ca).trace() + 4.0 * am.dot(mom.cov * am) +
         4.0 * qf.b.dot(mom.cov * am) + qf.b.dot(mom.cov * qf.b);
}

LmgfValue lmgf_with_derivatives(const QuadraticForm& qf,
                                const GaussianMoments& mom, double s) {
  check_dims(qf, mom);
  if (!saddle_domain(qf, mom).contains(s))
    throw DomainError("s = " + std::to_string(s) + " is outside the LMGF domain");

  const auto d = qf.dim();
  Eigen::LLT<Eigen::MatrixXd> cov_llt(mom.cov);
  if (cov_llt.info() != Eigen::Success)
    throw NumericError("covariance is not positive definite");
  const Eigen::MatrixXd prec = cov_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double log_det_cov =
      2.0 * cov_llt.matrixLLT().diagonal().array().log().sum();

  // |I - 2sCA| = |C| |C^-1 - 2sA|; the log|C| pieces cancel against the
  // quadratic term at s = 0.
  const Eigen::MatrixXd pencil = symmetric_part(prec - 2.0 * s * qf.a);
  Eigen::LLT<Eigen::MatrixXd> pencil_llt(pencil);
  if (pencil_llt.info() != Eigen::Success)
    throw NumericError("C^-1 - 2sA is not positive definite inside the domain");
  const Eigen::MatrixXd resolvent =
      pencil_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double log_det_pencil =
      2.0 * pencil_llt.matrixLLT().diagonal().array().log().sum();

  const Eigen::VectorXd prec_mean = prec * mom.mean;
  const Eigen::VectorXd v = s * qf.b + prec_mean;
  const Eigen::VectorXd mv = resolvent * v;
  const Eigen::VectorXd mb = resolvent * qf.b;
  const Eigen::MatrixXd ma = resolvent * qf.a;
  const Eigen::VectorXd a_mv = qf.a * mv;

  LmgfValue out;
  out.value = -0.5 * (log_det_cov + log_det_pencil) -
              0.5 * mom.mean.dot(prec_mean) + 0.5 * v.dot(mv) + s * qf.c;
  out.first = ma.trace() + qf.b.dot(mv) + mv.dot(a_mv) + qf.c;
  out.second = 2.0 * (ma * ma).trace() + qf.b.dot(mb) +
               4.0 * mb.dot(a_mv) + 4.0 * a_mv.dot(resolvent * a_mv);
  return out;
}

SaddleDomain saddle_domain(const QuadraticForm& qf, const GaussianMoments& mom) {
  return SpectralLmgf(qf, mom).domain();
}

double solve_saddle(const QuadraticForm& qf, const GaussianMoments& mom,
                    double tau, Tail tail) {
  return SpectralLmgf(qf, mom).solve_saddle(tau, tail);
}

TailResult tail_probability(const QuadraticForm& qf, const GaussianMoments& mom,
                            double tau, Tail tail) {
  return SpectralLmgf(qf, mom).tail(tau, tail);
}

SpectralLmgf::SpectralLmgf(const QuadraticForm& qf, const GaussianMoments& mom) {
  check_dims(qf, mom);
  const Eigen::MatrixXd lower = lower_factor(mom.cov);
  const Eigen::MatrixXd whitened =
      symmetric_part(lower.transpose() * qf.a * lower);
  const Eigen::VectorXd g =
      lower.transpose() * (2.0 * (qf.a * mom.mean) + qf.b);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(whitened);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition of the whitened form failed");
  eig_ = es.eigenvalues();
  lin_ = es.eigenvectors().transpose() * g;
  weight_ = Eigen::VectorXd::Ones(eig_.size());
  offset_ = mom.mean.dot(qf.a * mom.mean) + qf.b.dot(mom.mean) + qf.c;
  finish();
}

SpectralLmgf::SpectralLmgf(const SlotQuadraticForm& qf,
                           const SlotGaussianMoments& mom) {
  const int n = qf.n();
  const int m = qf.m;
  if (mom.m != m || mom.slot_mean.size() != n || mom.slot_cov.rows() != n ||
      mom.slot_cov.cols() != n || qf.within.rows() != n ||
      qf.across.rows() != n)
    throw DomainError("slot form and slot moments have inconsistent dimensions");

  const Eigen::MatrixXd lower = lower_factor(mom.slot_cov);
  const Eigen::MatrixXd lt = lower.transpose();
  const Eigen::MatrixXd k_within = symmetric_part(lt * qf.within * lower);
  const Eigen::MatrixXd k_across = symmetric_part(lt * qf.across * lower);
  const Eigen::MatrixXd slot_total = qf.within + m * qf.across;
  const Eigen::VectorXd g =
      lt * (2.0 * (slot_total * mom.slot_mean) + qf.slot_linear);

  // Time-mean mode carries the whole linear term and the across-slot
  // coupling; the m - 1 zero-mean modes share the within-slot spectrum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mean_mode(
      symmetric_part(k_within + m * k_across));
  if (mean_mode.info() != Eigen::Success)
    throw NumericError("eigendecomposition of the time-mean mode failed");

  const Eigen::Index rest = m > 1 ? n : 0;
  eig_.resize(n + rest);
  lin_.setZero(n + rest);
  weight_.resize(n + rest);
  eig_.head(n) = mean_mode.eigenvalues();
  lin_.head(n) =
      std::sqrt(static_cast<double>(m)) * (mean_mode.eigenvectors().transpose() * g);
  weight_.head(n).setOnes();
  if (rest > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> other(k_within,
                                                         Eigen::EigenvaluesOnly);
    if (other.info() != Eigen::Success)
      throw NumericError("eigendecomposition of the within-slot form failed");
    eig_.tail(rest) = other.eigenvalues();
    weight_.tail(rest).setConstant(m - 1);
  }
  offset_ = m * (mom.slot_mean.dot(slot_total * mom.slot_mean) +
                 qf.slot_linear.dot(mom.slot_mean)) +
            qf.c;
  finish();
}

void SpectralLmgf::finish() {
  double lam_max = 0.0;
  double lam_min = 0.0;
  for (Eigen::Index k = 0; k < eig_.size(); ++k) {
    if (weight_(k) <= 0.0) continue;
    lam_max = std::max(lam_max, eig_(k));
    lam_min = std::min(lam_min, eig_(k));
  }
  domain_ = SaddleDomain{};
  if (lam_max > 0.0) domain_.hi = 1.0 / (2.0 * lam_max);
  if (lam_min < 0.0) domain_.lo = 1.0 / (2.0 * lam_min);
}

LmgfValue SpectralLmgf::at(double s) const {
  if (!domain_.contains(s))
    throw DomainError("s = " + std::to_string(s) + " is outside the LMGF domain");
  LmgfValue out;
  for (Eigen::Index k = 0; k < eig_.size(); ++k) {
    const double w = weight_(k);
    const double lam = eig_(k);
    const double beta_sq = lin_(k) * lin_(k);
    const double u = 1.0 - 2.0 * s * lam;
    out.value += w * (-0.5 * std::log1p(-2.0 * s * lam) +
                      s * s * beta_sq / (2.0 * u));
    out.first += w * (lam / u + beta_sq * s * (1.0 - s * lam) / (u * u));
    out.second += w * (2.0 * lam * lam / (u * u) + beta_sq / (u * u * u));
  }
  out.value += s * offset_;
  out.first += offset_;
  return out;
}

double SpectralLmgf::mean() const { return offset_ + weight_.dot(eig_); }

double SpectralLmgf::variance() const {
  return (weight_.array() *
          (2.0 * eig_.array().square() + lin_.array().square()))
      .sum();
}

double SpectralLmgf::solve_saddle(double tau, Tail tail) const {
  const double mu0 = mean();
  const double var = variance();
  const double tol = 1e-10 * std::max(1.0, std::abs(tau));
  if (!std::isfinite(tau)) throw DomainError("threshold must be finite");
  if (!(var > 0.0))
    throw DegenerateThreshold("statistic has zero variance");
  if (std::abs(tau - mu0) <= tol)
    throw DegenerateThreshold("threshold equals the mean of the statistic");

  const double dir = tail == Tail::upper ? 1.0 : -1.0;
  if (dir * (tau - mu0) < 0.0)
    throw DomainError(tail == Tail::upper
                          ? "upper tail needs a threshold above the mean"
                          : "lower tail needs a threshold below the mean");

  const double edge = tail == Tail::upper ? domain_.hi : domain_.lo;
  const bool bounded = std::isfinite(edge);
  auto excess = [&](double s) { return at(s).first - tau; };

  // With no pole on this side the statistic has bounded support there:
  // mu'(s) tends to offset - sum w beta^2 / (4 lambda) as s runs off.
  if (!bounded) {
    double limit = offset_;
    for (Eigen::Index k = 0; k < eig_.size(); ++k) {
      const double beta_sq = lin_(k) * lin_(k);
      if (eig_(k) != 0.0)
        limit -= weight_(k) * beta_sq / (4.0 * eig_(k));
      else if (beta_sq > 0.0)
        limit = dir * std::numeric_limits<double>::infinity();
      if (std::isinf(limit)) break;
    }
    if (dir * (tau - limit) >= -tol)
      throw UnreachableThreshold("threshold is outside the support of the statistic");
  }

  // Grow the bracket from s = 0 toward the domain edge until mu' passes tau.
  double inner = 0.0;
  double outer = (tau - mu0) / var;
  if (bounded && dir * outer >= dir * edge) outer = 0.5 * edge;
  for (int iter = 0;; ++iter) {
    if (iter > 4000 || !std::isfinite(outer) || !domain_.contains(outer))
      throw UnreachableThreshold("threshold is beyond the range of mu'(s)");
    const double e = excess(outer);
    if (!std::isfinite(e))
      throw UnreachableThreshold("threshold is beyond the range of mu'(s)");
    if (dir * e >= 0.0) break;
    inner = outer;
    const double next = bounded ? 0.5 * (outer + edge) : 2.0 * outer;
    if (next == outer)
      throw UnreachableThreshold("threshold is beyond the range of mu'(s)");
    outer = next;
  }

  // Safeguarded Newton on the increasing function mu'(s) - tau.
  double lo = std::min(inner, outer);
  double hi = std::max(inner, outer);
  double s = outer;
  for (int iter = 0; iter < 200; ++iter) {
    const LmgfValue v = at(s);
    const double f = v.first - tau;
    if (f == 0.0) break;
    if (f < 0.0) lo = s; else hi = s;
    double next = s - f / v.second;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::abs(s)) {
      s = next;
      break;
    }
    s = next;
  }
  if (std::abs(excess(s)) > tol)
    throw NumericError("saddle point solver did not converge");
  return s;
}

TailResult SpectralLmgf::tail(double tau, Tail tail) const {
  return tail_at_saddle(solve_saddle(tau, tail));
}

TailResult SpectralLmgf::tail_at_saddle(double s) const {
  if (s == 0.0) throw DegenerateThreshold("saddle point at zero");
  const LmgfValue v = at(s);
  // s mu'(s) - mu(s), summed term by term so the offset cancels exactly.
  double exponent = 0.0;
  for (Eigen::Index k = 0; k < eig_.size(); ++k) {
    const double lam = eig_(k);
    const double u = 1.0 - 2.0 * s * lam;
    exponent += weight_(k) * (legendre_log_term(-2.0 * s * lam) +
                              lin_(k) * lin_(k) * s * s / (2.0 * u * u));
  }
  TailResult out;
  out.saddle = s;
  out.exponent = std::max(0.0, exponent);
  out.log_prefactor =
      -0.5 * std::log(2.0 * std::numbers::pi * s * s * v.second);
  out.log_prob = out.log_prefactor - out.exponent;
  return out;
}

}  // namespace coopsense
