#include "msgd/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace msgd {

double frob_rel_dist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frob_rel_dist: shape mismatch");
  }
  const double denom = b.norm();
  if (denom == 0.0) {
    throw std::invalid_argument("frob_rel_dist: reference matrix has zero norm");
  }
  return (a - b).norm() / denom;
}

FitResult loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw std::invalid_argument("loglog_slope: need at least 3 points");
  }
  const auto k = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("loglog_slope: values must be positive");
    }
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double sxx_c = sxx - sx * sx / k;
  if (sxx_c <= 0.0) {
    throw std::invalid_argument("loglog_slope: x values must be distinct");
  }
  const double sxy_c = sxy - sx * sy / k;
  const double syy_c = syy - sy * sy / k;

  FitResult fit;
  fit.slope = sxy_c / sxx_c;
  fit.intercept = (sy - fit.slope * sx) / k;
  const double ss_res = std::max(0.0, syy_c - fit.slope * sxy_c);
  fit.r_squared = (syy_c > 0.0) ? 1.0 - ss_res / syy_c : 1.0;
  fit.slope_stderr =
      (points.size() > 2) ? std::sqrt(ss_res / (k - 2.0) / sxx_c) : 0.0;
  return fit;
}

namespace {

// Acklam's rational approximation to the standard normal quantile,
// |relative error| < 1.15e-9 on (0, 1).
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double pl = 0.02425;
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
  }
  if (p < pl) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - pl) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("normal_two_sided_quantile: level must be in (0,1)");
  }
  return inverse_normal_cdf(0.5 + level / 2.0);
}

std::pair<double, double> mean_ci(const std::vector<double>& samples, double level) {
  if (samples.size() < 2) {
    throw std::invalid_argument("mean_ci: need at least 2 samples");
  }
  const auto k = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / k;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / (k - 1.0));
  const double z = normal_two_sided_quantile(level);
  return {mean, z * s / std::sqrt(k)};
}

}  // namespace msgd
