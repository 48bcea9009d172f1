#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace msgd {

/// Ordinary least-squares line fit.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// ||A - B||_F / ||B||_F. Throws on shape mismatch or ||B||_F == 0.
double frob_rel_dist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// OLS fit of log(y) against log(x). Needs >= 3 points, distinct positive x,
/// positive y.
FitResult loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Normal-approximation confidence interval: (mean, z * s / sqrt(k)).
/// Needs >= 2 samples.
std::pair<double, double> mean_ci(const std::vector<double>& samples,
                                  double level = 0.95);

/// Upper quantile z with P(|N(0,1)| <= z) = level.
double normal_two_sided_quantile(double level);

/// Half-open intervals [m1 +- h1], [m2 +- h2] intersect.
inline bool intervals_overlap(double m1, double h1, double m2, double h2) {
  return std::max(m1 - h1, m2 - h2) <= std::min(m1 + h1, m2 + h2);
}

/// Streaming mean/covariance accumulator for vector samples.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Eigen::Index dim)
      : count_(0), sum_(Eigen::VectorXd::Zero(dim)),
        sum_outer_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& v) {
    ++count_;
    sum_ += v;
    sum_outer_.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }

  long count() const { return count_; }
  Eigen::VectorXd mean() const { return sum_ / static_cast<double>(count_); }

  /// Sample covariance about the sample mean (divisor = count).
  Eigen::MatrixXd covariance() const {
    const double m = static_cast<double>(count_);
    Eigen::MatrixXd second =
        Eigen::MatrixXd(sum_outer_.selfadjointView<Eigen::Lower>()) / m;
    const Eigen::VectorXd mu = mean();
    return second - mu * mu.transpose();
  }

 private:
  long count_;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd sum_outer_;
};

}  // namespace msgd
