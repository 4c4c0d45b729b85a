#pragma once

// Geometry and per-hypothesis Gaussian models (all quantities in dB).
//
// Under H0 each SU reading is N(0, sigma0^2) independently. Under H1 the
// slot vector y_i ~ N(mu, Sigma1) with
//   mu_j    = Pt + K - 10 gamma log10(d_PT,j / d0) - m0
//   Sigma1  = sigma0^2 I + sigma_SH^2 Sigma_SH,   (Sigma_SH)_jk = exp(-d_jk/d_c)
// and slots are independent.

#include <vector>

#include <Eigen/Dense>

#include "coopsense/rng.hpp"

namespace coopsense {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct PropagationParams {
  double transmit_power_dbm = 0.97;
  double antenna_const_db = 0.0;
  double path_loss_exponent = 3.3;
  double reference_distance = 1.0;
  double detector_mean_dbm = 0.0;

  void validate() const;
};

struct NoiseParams {
  double noise_var = 1.0;   // sigma0^2
  double shadow_var = 0.0;  // sigma_SH^2
  double decorr_distance = 0.14;

  double total_var() const { return noise_var + shadow_var; }
  void validate() const;
};

/// Primary transmitter plus n secondary users, with cached distances.
class Placement {
public:
  Placement(Point pt, std::vector<Point> sus);

  int size() const { return static_cast<int>(sus_.size()); }
  Point pt() const { return pt_; }
  const std::vector<Point>& sus() const { return sus_; }

  const Eigen::VectorXd& pt_distances() const { return pt_dist_; }
  const Eigen::MatrixXd& pairwise_distances() const { return pair_dist_; }

private:
  Point pt_;
  std::vector<Point> sus_;
  Eigen::VectorXd pt_dist_;
  Eigen::MatrixXd pair_dist_;
};

class HypothesisModel {
public:
  HypothesisModel(int m, Eigen::VectorXd mu, double sigma0_sq,
                  double sigma1_sq, Eigen::MatrixXd shadow_corr,
                  Eigen::MatrixXd cov_h1);

  int n() const { return static_cast<int>(mu_.size()); }
  int m() const { return m_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  double sigma0_sq() const { return sigma0_sq_; }
  double sigma1_sq() const { return sigma1_sq_; }
  const Eigen::MatrixXd& shadow_corr() const { return shadow_corr_; }
  const Eigen::MatrixXd& cov_h1() const { return cov_h1_; }
  const Eigen::MatrixXd& norm_cov_h1() const { return norm_cov_h1_; }

  /// Lower Cholesky factor L with L L^T = cov_h1().
  const Eigen::MatrixXd& cov_h1_factor() const { return cov_h1_factor_; }
  double log_det_cov_h1() const;
  /// Diagonal jitter that had to be added to make Sigma1 factorizable.
  double jitter() const { return jitter_; }

private:
  int m_;
  Eigen::VectorXd mu_;
  double sigma0_sq_;
  double sigma1_sq_;
  Eigen::MatrixXd shadow_corr_;
  Eigen::MatrixXd cov_h1_;
  Eigen::MatrixXd norm_cov_h1_;
  Eigen::MatrixXd cov_h1_factor_;
  double jitter_ = 0.0;
};

/// Deterministic part of the received power at distance d, relative to the
/// detector mean m0 (dB).
double mean_received_power(double d, const PropagationParams& prop);

/// PT at the origin, SUs uniform in the axis-aligned square of side `edge`
/// centred at (pt_distance, 0).
Placement sample_placement(Rng& rng, int n, double edge, double pt_distance);

Eigen::MatrixXd shadowing_correlation(const Placement& placement,
                                      double decorr_distance);

HypothesisModel build_hypothesis_model(const Placement& placement,
                                       const PropagationParams& prop,
                                       const NoiseParams& noise, int m);

}  // namespace coopsense
