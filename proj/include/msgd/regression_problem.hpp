#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "msgd/rng.hpp"

namespace msgd {

/// Online least-squares population: x ~ N(0, Sigma), y = x^T theta_star + eps
/// with eps ~ N(0, sigma2). Carries the constants of the fourth-moment,
/// residual and spectral assumptions; for Gaussian inputs
/// E[||x||^2 xx^T] = (tr Sigma) Sigma + 2 Sigma^2, so
/// r_squared = tr(Sigma) + 2 lambda_max is the tightest valid choice.
class RegressionProblem {
 public:
  RegressionProblem(Eigen::MatrixXd sigma, Eigen::VectorXd theta_star, double sigma2)
      : sigma_(std::move(sigma)), theta_star_(std::move(theta_star)), sigma2_(sigma2) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() != theta_star_.size()) {
      throw std::invalid_argument("RegressionProblem: dimension mismatch");
    }
    if (sigma2_ < 0.0) throw std::invalid_argument("RegressionProblem: sigma2 < 0");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("RegressionProblem: Sigma must be positive definite");
    }
    chol_ = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_);
    lambda_max_ = es.eigenvalues().maxCoeff();
    lambda_min_ = es.eigenvalues().minCoeff();
    trace_ = sigma_.trace();
    identity_ = sigma_.isIdentity(0.0);
  }

  static RegressionProblem isotropic(int p, double sigma2) {
    return RegressionProblem(Eigen::MatrixXd::Identity(p, p),
                             Eigen::VectorXd::Zero(p), sigma2);
  }

  int dim() const { return static_cast<int>(theta_star_.size()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  double sigma2() const { return sigma2_; }
  double trace_sigma() const { return trace_; }
  double lambda_max() const { return lambda_max_; }
  double lambda_min() const { return lambda_min_; }
  double r_squared() const { return trace_ + 2.0 * lambda_max_; }
  double lambda() const { return lambda_max_; }
  bool sigma_is_identity() const { return identity_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_; }

  Eigen::VectorXd sample_input(RngStream& s) const {
    return chol_ * s.gaussian_vector(dim());
  }

  double sample_target(const Eigen::VectorXd& x, RngStream& s) const {
    return theta_star_.dot(x) + std::sqrt(sigma2_) * s.next_gaussian();
  }

 private:
  Eigen::MatrixXd sigma_;
  Eigen::VectorXd theta_star_;
  double sigma2_;
  Eigen::MatrixXd chol_;
  double lambda_max_ = 0.0, lambda_min_ = 0.0, trace_ = 0.0;
  bool identity_ = false;
};

}  // namespace msgd
