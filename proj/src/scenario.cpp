#include "coopsense/scenario.hpp"

#include <cmath>
#include <string>

#include "coopsense/errors.hpp"

namespace coopsense {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void PropagationParams::validate() const {
  if (!(path_loss_exponent > 0.0))
    throw DomainError("path loss exponent must be positive");
  if (!(reference_distance > 0.0))
    throw DomainError("reference distance must be positive");
  if (!std::isfinite(transmit_power_dbm) || !std::isfinite(antenna_const_db) ||
      !std::isfinite(detector_mean_dbm))
    throw DomainError("propagation parameters must be finite");
}

void NoiseParams::validate() const {
  if (!(noise_var > 0.0)) throw DomainError("noise variance must be positive");
  if (!(shadow_var >= 0.0))
    throw DomainError("shadowing variance must be nonnegative");
  if (!(decorr_distance > 0.0))
    throw DomainError("decorrelation distance must be positive");
}

Placement::Placement(Point pt, std::vector<Point> sus)
    : pt_(pt), sus_(std::move(sus)) {
  const int n = size();
  if (n < 1) throw DomainError("placement needs at least one SU");
  pt_dist_.resize(n);
  pair_dist_.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    pt_dist_(i) = distance(pt_, sus_[i]);
    for (int j = 0; j < i; ++j) {
      const double d = distance(sus_[i], sus_[j]);
      pair_dist_(i, j) = d;
      pair_dist_(j, i) = d;
    }
  }
}

HypothesisModel::HypothesisModel(int m, Eigen::VectorXd mu, double sigma0_sq,
                                 double sigma1_sq, Eigen::MatrixXd shadow_corr,
                                 Eigen::MatrixXd cov_h1)
    : m_(m),
      mu_(std::move(mu)),
      sigma0_sq_(sigma0_sq),
      sigma1_sq_(sigma1_sq),
      shadow_corr_(std::move(shadow_corr)),
      cov_h1_(std::move(cov_h1)) {
  const auto n = mu_.size();
  if (m_ < 1 || n < 1) throw DomainError("model needs n >= 1 and m >= 1");
  if (cov_h1_.rows() != n || cov_h1_.cols() != n || shadow_corr_.rows() != n ||
      shadow_corr_.cols() != n)
    throw DomainError("model dimensions are inconsistent");
  if (!(sigma0_sq_ > 0.0) || !(sigma1_sq_ > 0.0))
    throw DomainError("model variances must be positive");

  Eigen::LLT<Eigen::MatrixXd> llt(cov_h1_);
  if (llt.info() != Eigen::Success) {
    // Coincident SUs make Sigma_SH rank deficient; a tiny ridge restores
    // definiteness without moving anything at reported precision.
    jitter_ = 1e-10 * sigma1_sq_;
    cov_h1_.diagonal().array() += jitter_;
    llt.compute(cov_h1_);
    if (llt.info() != Eigen::Success)
      throw NumericError("Sigma1 is not positive definite after jitter");
  }
  cov_h1_factor_ = llt.matrixL();
  norm_cov_h1_ = cov_h1_ / sigma1_sq_;
}

double HypothesisModel::log_det_cov_h1() const {
  return 2.0 * cov_h1_factor_.diagonal().array().log().sum();
}

double mean_received_power(double d, const PropagationParams& prop) {
  if (!(d > 0.0))
    throw DomainError("distance must be positive, got " + std::to_string(d));
  return prop.transmit_power_dbm + prop.antenna_const_db -
         10.0 * prop.path_loss_exponent *
             std::log10(d / prop.reference_distance) -
         prop.detector_mean_dbm;
}

Placement sample_placement(Rng& rng, int n, double edge, double pt_distance) {
  if (n < 1) throw DomainError("placement needs at least one SU");
  if (!(edge >= 0.0)) throw DomainError("square edge must be nonnegative");
  if (!(pt_distance > 0.0)) throw DomainError("PT distance must be positive");

  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<Point> sus(static_cast<std::size_t>(n));
  for (auto& p : sus) {
    p.x = pt_distance + edge * unit(rng);
    p.y = edge * unit(rng);
  }
  return Placement({0.0, 0.0}, std::move(sus));
}

Eigen::MatrixXd shadowing_correlation(const Placement& placement,
                                      double decorr_distance) {
  if (!(decorr_distance > 0.0))
    throw DomainError("decorrelation distance must be positive");
  return (-placement.pairwise_distances().array() / decorr_distance)
      .exp()
      .matrix();
}

HypothesisModel build_hypothesis_model(const Placement& placement,
                                       const PropagationParams& prop,
                                       const NoiseParams& noise, int m) {
  prop.validate();
  noise.validate();
  if (m < 1) throw DomainError("need at least one time slot");

  const int n = placement.size();
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i)
    mu(i) = mean_received_power(placement.pt_distances()(i), prop);

  Eigen::MatrixXd corr = shadowing_correlation(placement, noise.decorr_distance);
  Eigen::MatrixXd cov = noise.shadow_var * corr;
  cov.diagonal().array() += noise.noise_var;
  return HypothesisModel(m, std::move(mu), noise.noise_var, noise.total_var(),
                         std::move(corr), std::move(cov));
}

}  // namespace coopsense
