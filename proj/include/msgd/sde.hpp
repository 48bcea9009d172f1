#pragma once

#include <Eigen/Dense>

#include <vector>

#include "msgd/models.hpp"
#include "msgd/rng.hpp"
#include "msgd/stats.hpp"

namespace msgd {

/// Brownian increments on a two-level grid: m fine increments per coarse
/// interval, with the coarse increment formed as their exact sum so both
/// discretizations ride one Brownian path.
struct BrownianInterval {
  std::vector<Eigen::VectorXd> fine;  // m increments ~ N(0, h I)
  Eigen::VectorXd coarse;             // sum of the fine increments
};

BrownianInterval draw_brownian_interval(int dim, int m, double fine_step, RngStream& s);

/// One coupled realization of the discrete Gaussian-MSGD chain at step eta
/// and the Euler-Maruyama path of
///   dTheta = -grad L(Theta) dt + sqrt(eta) C(Theta) dW
/// at step eta/m, sharing the Brownian motion. C(theta) is the scaled
/// gradient matrix (1/sqrt(bN)) grad Lcal(theta).
struct CoupledPaths {
  double eta = 0.0;
  int m = 1;
  std::vector<double> squared_errors;  // ||Theta_{k eta} - theta_k||^2 per coarse step
  double max_squared_error = 0.0;
};

CoupledPaths simulate_coupled(const Model& model, const Dataset& data,
                              const Eigen::VectorXd& theta0, double eta, int m,
                              double horizon, int b, RngStream& s);

struct StrongErrorPoint {
  double eta = 0.0;
  double mean_max_sq_error = 0.0;
  double ci_half = 0.0;
  int trials = 0;
  std::vector<double> per_trial;  // max squared error, trial order
};

struct StrongErrorCurve {
  std::vector<StrongErrorPoint> points;
  FitResult fit;  // log mean error vs log eta
};

/// Monte Carlo strong-error sweep over decreasing step sizes at a fixed
/// horizon; trial t of point i uses the stream "<label>/eta<i>/trial<t>"
/// derived from root_seed.
StrongErrorCurve strong_error_curve(const Model& model, const Dataset& data,
                                    const Eigen::VectorXd& theta0,
                                    const std::vector<double>& etas, int m,
                                    double horizon, int b, int trials,
                                    std::uint64_t root_seed,
                                    const std::string& label);

}  // namespace msgd
