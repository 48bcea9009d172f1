#include "msgd/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "msgd/parallel.hpp"

namespace msgd {

BrownianInterval draw_brownian_interval(int dim, int m, double fine_step, RngStream& s) {
  BrownianInterval out;
  out.fine.reserve(m);
  out.coarse = Eigen::VectorXd::Zero(dim);
  const double root_h = std::sqrt(fine_step);
  for (int j = 0; j < m; ++j) {
    out.fine.push_back(root_h * s.gaussian_vector(dim));
    out.coarse += out.fine.back();
  }
  return out;
}

CoupledPaths simulate_coupled(const Model& model, const Dataset& data,
                              const Eigen::VectorXd& theta0, double eta, int m,
                              double horizon, int b, RngStream& s) {
  if (!(eta > 0.0) || m < 1 || !(horizon > 0.0) || b < 1) {
    throw std::invalid_argument("simulate_coupled: bad parameters");
  }
  const auto coarse_steps = static_cast<long>(std::llround(horizon / eta));
  if (coarse_steps < 1 || std::abs(coarse_steps * eta - horizon) > 1e-9 * horizon) {
    throw std::invalid_argument("simulate_coupled: eta must divide the horizon");
  }
  const int n = data.size();
  const double diffusion_scale =
      std::sqrt(eta) / std::sqrt(static_cast<double>(b) * n);
  const double h = eta / m;

  Eigen::VectorXd discrete = theta0;
  Eigen::VectorXd fine = theta0;

  CoupledPaths out;
  out.eta = eta;
  out.m = m;
  out.squared_errors.reserve(coarse_steps + 1);
  out.squared_errors.push_back(0.0);

  for (long k = 0; k < coarse_steps; ++k) {
    const BrownianInterval dw = draw_brownian_interval(n, m, h, s);
    for (int j = 0; j < m; ++j) {
      const Eigen::MatrixXd g = gradient_matrix(model, fine, data);
      const Eigen::VectorXd drift = g.rowwise().mean();
      fine += -h * drift + diffusion_scale * (g * dw.fine[j]);
      if (!fine.allFinite()) {
        throw std::runtime_error("simulate_coupled: fine path left finite range");
      }
    }
    {
      const Eigen::MatrixXd g = gradient_matrix(model, discrete, data);
      const Eigen::VectorXd drift = g.rowwise().mean();
      discrete += -eta * drift + diffusion_scale * (g * dw.coarse);
      if (!discrete.allFinite()) {
        throw std::runtime_error("simulate_coupled: discrete path left finite range");
      }
    }
    out.squared_errors.push_back((fine - discrete).squaredNorm());
  }
  out.max_squared_error = 0.0;
  for (double e : out.squared_errors) {
    out.max_squared_error = std::max(out.max_squared_error, e);
  }
  return out;
}

StrongErrorCurve strong_error_curve(const Model& model, const Dataset& data,
                                    const Eigen::VectorXd& theta0,
                                    const std::vector<double>& etas, int m,
                                    double horizon, int b, int trials,
                                    std::uint64_t root_seed, const std::string& label) {
  if (etas.size() < 2) {
    throw std::invalid_argument("strong_error_curve: need at least 2 step sizes");
  }
  for (std::size_t i = 1; i < etas.size(); ++i) {
    if (!(etas[i] < etas[i - 1])) {
      throw std::invalid_argument("strong_error_curve: etas must strictly decrease");
    }
  }
  if (trials < 2) throw std::invalid_argument("strong_error_curve: need >= 2 trials");

  StrongErrorCurve curve;
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    std::vector<double> errs(trials);
    parallel_for(trials, [&](int t) {
      RngStream stream = derive_stream(
          root_seed, label + "/eta" + std::to_string(i) + "/trial" + std::to_string(t));
      errs[static_cast<std::size_t>(t)] =
          simulate_coupled(model, data, theta0, etas[i], m, horizon, b, stream)
              .max_squared_error;
    });
    const auto [mean, half] = mean_ci(errs, 0.95);
    curve.points.push_back({etas[i], mean, half, trials, errs});
    fit_points.emplace_back(etas[i], mean);
  }
  curve.fit = loglog_slope(fit_points);
  return curve;
}

}  // namespace msgd
