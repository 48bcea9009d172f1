#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "msgd/models.hpp"
#include "msgd/noise.hpp"
#include "msgd/rng.hpp"

namespace msgd {

struct OptimizerConfig {
  double eta = 0.1;
  int steps = 1000;
  int eval_every = 100;
  double divergence_factor = 1e6;  // abort once train loss exceeds this x initial
};

struct EvalRecord {
  int iter = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;  // NaN when no test set
  double test_acc = 0.0;   // NaN unless classification
};

struct Trajectory {
  std::vector<EvalRecord> records;
  Eigen::VectorXd final_theta;
  bool diverged = false;
};

/// Extra evaluation data; accuracy is reported when classification is set.
struct EvalSpec {
  const Dataset* test = nullptr;
  bool classification = false;
};

/// Full-data multiplicative SGD: theta <- theta - eta * grad(Lcal . W) with
/// W = ones/n + V drawn fresh each step. nullopt noise means V = 0, i.e.
/// plain gradient descent. spec.n must equal the dataset size.
Trajectory run_msgd(const Model& model, const Dataset& train, const EvalSpec& eval,
                    const Eigen::VectorXd& theta0, const OptimizerConfig& config,
                    const std::optional<SamplingSpec>& noise, RngStream& s);

/// Mini-batch variant: each step samples B of n points uniformly without
/// replacement and applies weights ones/B + noise_scale * V over the batch.
/// inner spec length (vector_length) must equal B; nullopt means plain
/// large-batch SGD.
Trajectory run_minibatch_msgd(const Model& model, const Dataset& train,
                              const EvalSpec& eval, const Eigen::VectorXd& theta0,
                              const OptimizerConfig& config, int batch_size,
                              const std::optional<SamplingSpec>& inner_noise,
                              double noise_scale, RngStream& s);

/// Default compensation scale for run_minibatch_msgd: matches the diagonal
/// of the total injected sampling covariance (selection + inner noise) to
/// the small-batch-b SGD diagonal. The magnitude is a free knob in the
/// underlying method, so callers may sweep around this value.
double minibatch_compensation_scale(int n, int b_target, int batch_size,
                                    const SamplingSpec& inner_noise);

enum class GldMode { Isotropic, Diagonal };

/// Gradient descent plus additive Gaussian noise scaled from C(theta):
/// theta <- theta - eta * grad L + eta * xi. The noise magnitude is
/// refreshed at every eval point and frozen in between.
Trajectory run_gld(const Model& model, const Dataset& train, const EvalSpec& eval,
                   const Eigen::VectorXd& theta0, const OptimizerConfig& config,
                   GldMode mode, int b, RngStream& s);

}  // namespace msgd
