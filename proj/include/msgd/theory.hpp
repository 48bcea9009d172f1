#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "msgd/regression_problem.hpp"
#include "msgd/rng.hpp"

namespace msgd {

enum class RecursionKind { SmallBatchSgd, TheoremSubsample, TheoremGaussian };

const char* to_string(RecursionKind kind);
RecursionKind recursion_kind_from_string(const std::string& name);

/// f(theta) - f(theta*) = 1/2 (theta - theta*)^T Sigma (theta - theta*),
/// exact in the known problem.
double excess_risk(const Eigen::VectorXd& theta, const RegressionProblem& problem);

/// Largest admissible step size, 2b / (R^2 + (b-1) lambda).
double stability_limit(const RegressionProblem& problem, int b);

struct BoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Constants of the averaged-iterate excess-risk bound
/// C1/(n+1) + C2/(n+1)^2, converted to excess risk (hence the 1/2 on the
/// initial-condition term). Throws if eta is at or beyond the stability
/// limit.
BoundConstants theorem1_constants(const RegressionProblem& problem, int b, double eta,
                                  const Eigen::VectorXd& theta0);

double theorem1_bound(const RegressionProblem& problem, int b, double eta,
                      const Eigen::VectorXd& theta0, long n);

struct AveragedRun {
  RecursionKind kind = RecursionKind::SmallBatchSgd;
  int B = 0;  // outer batch size (= b for SmallBatchSgd)
  int b = 0;
  double eta = 0.0;
  long iters = 0;
  Eigen::VectorXd theta_bar;
  /// (n, excess risk of theta_bar_n) at the requested checkpoints.
  std::vector<std::pair<long, double>> risk_curve;
};

/// Streaming averaged recursion on fresh samples. SmallBatchSgd draws
/// batches of size b with uniform weights 1/b; the Theorem kinds draw
/// batches of size B and weight them with covariance
/// (B-b)/(bB(B-1)) (I - ones ones^T / B). log_points must be sorted,
/// within [0, n_iters]. Throws on step sizes at or beyond the stability
/// limit.
AveragedRun run_online_recursion(const RegressionProblem& problem, int B, int b,
                                 double eta, long n_iters, RecursionKind kind,
                                 const std::vector<long>& log_points,
                                 const Eigen::VectorXd& theta0, RngStream& s);

}  // namespace msgd
