#pragma once

// Saddle-point tail probabilities for Gaussian quadratic forms.
//
// For T(y) = y^T A y + y^T b + c with y ~ N(m, C) the log moment generating
// function is
//   mu(s) = -1/2 log|I - 2sCA| - 1/2 m^T C^-1 m
//           + 1/2 (sb + C^-1 m)^T (C^-1 - 2sA)^-1 (sb + C^-1 m) + sc,
// finite for s in an open interval around zero. The tail estimate is the
// leading large-deviation term
//   P(T > tau) ~ exp(-(s* mu'(s*) - mu(s*))) / sqrt(2 pi s*^2 mu''(s*)),
// with mu'(s*) = tau (s* > 0 for the upper tail, s* < 0 for the lower).
//
// Two evaluation routes are provided. lmgf_with_derivatives() applies the
// matrix formula directly and refactorizes at every s. SpectralLmgf
// whitens y and diagonalizes the form once, which turns T into a sum of
// independent noncentral chi-square terms
//   T = offset + sum_k w_k (lambda_k z_k^2 + beta_k z_k),  z_k iid N(0,1),
// so every later evaluation costs O(number of distinct eigenvalues). All
// solvers run on the spectral route.

#include <limits>

#include <Eigen/Dense>

#include "coopsense/statistics.hpp"

namespace coopsense {

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Moments of the stacked vector when slots are iid N(slot_mean, slot_cov).
struct SlotGaussianMoments {
  int m = 1;
  Eigen::VectorXd slot_mean;
  Eigen::MatrixXd slot_cov;

  GaussianMoments to_dense() const;
};

SlotGaussianMoments h0_moments(const HypothesisModel& model);
SlotGaussianMoments h1_moments(const HypothesisModel& model);

/// Open interval (lo, hi) on which the LMGF is finite.
struct SaddleDomain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double s) const { return s > lo && s < hi; }
};

struct LmgfValue {
  double value = 0.0;   // mu(s)
  double first = 0.0;   // mu'(s)
  double second = 0.0;  // mu''(s)
};

enum class Tail { upper, lower };

struct TailResult {
  double log_prob = 0.0;
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double saddle = 0.0;

  double probability() const;
};

/// Closed-form E[T] and Var[T].
double quadratic_form_mean(const QuadraticForm& qf, const GaussianMoments& mom);
double quadratic_form_variance(const QuadraticForm& qf,
                               const GaussianMoments& mom);

/// Direct matrix evaluation of mu, mu', mu'' at s.
LmgfValue lmgf_with_derivatives(const QuadraticForm& qf,
                                const GaussianMoments& mom, double s);

SaddleDomain saddle_domain(const QuadraticForm& qf, const GaussianMoments& mom);

double solve_saddle(const QuadraticForm& qf, const GaussianMoments& mom,
                    double tau, Tail tail);

TailResult tail_probability(const QuadraticForm& qf, const GaussianMoments& mom,
                            double tau, Tail tail);

class SpectralLmgf {
public:
  SpectralLmgf(const QuadraticForm& qf, const GaussianMoments& mom);
  /// Exploits the slot structure: one n x n eigenproblem for the time-mean
  /// mode and one shared by the remaining m - 1 modes.
  SpectralLmgf(const SlotQuadraticForm& qf, const SlotGaussianMoments& mom);

  LmgfValue at(double s) const;
  SaddleDomain domain() const { return domain_; }
  double mean() const;
  double variance() const;

  double solve_saddle(double tau, Tail tail) const;
  TailResult tail(double tau, Tail tail) const;
  /// Tail estimate parametrized directly by the saddle point s != 0.
  TailResult tail_at_saddle(double s) const;

  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  const Eigen::VectorXd& linear_coefficients() const { return lin_; }
  const Eigen::VectorXd& multiplicities() const { return weight_; }
  double offset() const { return offset_; }

private:
  void finish();

  Eigen::VectorXd eig_;
  Eigen::VectorXd lin_;
  Eigen::VectorXd weight_;
  double offset_ = 0.0;
  SaddleDomain domain_;
};

}  // namespace coopsense
