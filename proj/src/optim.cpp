#include "msgd/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunState {
  Trajectory traj;
  double initial_loss = 0.0;
};

void record_eval(RunState& st, const Model& model, const Dataset& train,
                 const EvalSpec& eval, const Eigen::VectorXd& theta, int iter) {
  EvalRecord rec;
  rec.iter = iter;
  rec.train_loss = full_loss(model, theta, train);
  rec.test_loss = eval.test ? full_loss(model, theta, *eval.test) : kNaN;
  rec.test_acc = (eval.test && eval.classification)
                     ? classification_accuracy(model, theta, *eval.test)
                     : kNaN;
  st.traj.records.push_back(rec);
  if (st.traj.records.size() == 1) st.initial_loss = rec.train_loss;
}

bool blown_up(const RunState& st, const Eigen::VectorXd& theta, double factor) {
  if (!theta.allFinite()) return true;
  const double last = st.traj.records.back().train_loss;
  if (!std::isfinite(last)) return true;
  const double scale = std::max(std::abs(st.initial_loss), 1e-12);
  return last > factor * scale;
}

void check_config(const OptimizerConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("optimizer: eta must be > 0");
  if (config.steps < 1) throw std::invalid_argument("optimizer: steps must be >= 1");
  if (config.eval_every < 1) {
    throw std::invalid_argument("optimizer: eval_every must be >= 1");
  }
}

// Shared driver: step(theta, iter) performs one update in place.
template <typename StepFn>
Trajectory run_loop(const Model& model, const Dataset& train, const EvalSpec& eval,
                    const Eigen::VectorXd& theta0, const OptimizerConfig& config,
                    StepFn&& step) {
  check_config(config);
  RunState st;
  Eigen::VectorXd theta = theta0;
  for (int k = 0; k <= config.steps; ++k) {
    if (k % config.eval_every == 0) {
      record_eval(st, model, train, eval, theta, k);
      if (blown_up(st, theta, config.divergence_factor)) {
        st.traj.diverged = true;
        break;
      }
    }
    if (k < config.steps) {
      step(theta, k);
      if (!theta.allFinite()) {
        st.traj.diverged = true;
        break;
      }
    }
  }
  st.traj.final_theta = std::move(theta);
  return st.traj;
}

}  // namespace

Trajectory run_msgd(const Model& model, const Dataset& train, const EvalSpec& eval,
                    const Eigen::VectorXd& theta0, const OptimizerConfig& config,
                    const std::optional<SamplingSpec>& noise, RngStream& s) {
  const int n = train.size();
  if (noise) {
    validate(*noise);
    if (vector_length(*noise) != n) {
      throw std::invalid_argument("run_msgd: spec length must equal dataset size");
    }
  }
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
  return run_loop(model, train, eval, theta0, config,
                  [&](Eigen::VectorXd& theta, int) {
                    Eigen::VectorXd w = uniform;
                    if (noise) w += draw_sampling_noise(*noise, s).values;
                    theta -= config.eta * model.weighted_loss_grad(theta, train, w);
                  });
}

double minibatch_compensation_scale(int n, int b_target, int batch_size,
                                    const SamplingSpec& inner_noise) {
  if (batch_size < 1 || batch_size > n) {
    throw std::invalid_argument("compensation scale: need 1 <= B <= n");
  }
  if (b_target < 1 || b_target > n) {
    throw std::invalid_argument("compensation scale: need 1 <= b <= n");
  }
  const double nn = n, bb = b_target, big = batch_size;
  // Per-coordinate variance target: diagonal of the with-replacement
  // small-batch noise. Uniform selection of B of n contributes
  // 1/(nB) - 1/n^2 on its own; the inner noise fills the rest.
  const double target = (1.0 / (bb * nn)) * (1.0 - 1.0 / nn);
  const double selection = 1.0 / (nn * big) - 1.0 / (nn * nn);
  const double inner_var = theoretical_sampling_cov(inner_noise)(0, 0);
  if (inner_var <= 0.0) {
    throw std::invalid_argument("compensation scale: inner noise is degenerate");
  }
  const double gap = target - selection;
  if (gap <= 0.0) return 0.0;
  return std::sqrt(gap / ((big / nn) * inner_var));
}

Trajectory run_minibatch_msgd(const Model& model, const Dataset& train,
                              const EvalSpec& eval, const Eigen::VectorXd& theta0,
                              const OptimizerConfig& config, int batch_size,
                              const std::optional<SamplingSpec>& inner_noise,
                              double noise_scale, RngStream& s) {
  const int n = train.size();
  if (batch_size < 1 || batch_size > n) {
    throw std::invalid_argument("run_minibatch_msgd: need 1 <= B <= n");
  }
  if (inner_noise) {
    validate(*inner_noise);
    if (vector_length(*inner_noise) != batch_size) {
      throw std::invalid_argument("run_minibatch_msgd: inner spec length must be B");
    }
  }
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(batch_size, 1.0 / batch_size);
  std::vector<int> pool(train.size());
  return run_loop(
      model, train, eval, theta0, config, [&](Eigen::VectorXd& theta, int) {
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> batch(batch_size);
        for (int i = 0; i < batch_size; ++i) {
          const int j =
              i + static_cast<int>(s.next_below(static_cast<std::uint64_t>(n - i)));
          std::swap(pool[i], pool[j]);
          batch[i] = pool[i];
        }
        const Dataset view = train.subset(batch);
        Eigen::VectorXd w = uniform;
        if (inner_noise) {
          w += noise_scale * draw_sampling_noise(*inner_noise, s).values;
        }
        theta -= config.eta * model.weighted_loss_grad(theta, view, w);
      });
}

Trajectory run_gld(const Model& model, const Dataset& train, const EvalSpec& eval,
                   const Eigen::VectorXd& theta0, const OptimizerConfig& config,
                   GldMode mode, int b, RngStream& s) {
  if (b < 1) throw std::invalid_argument("run_gld: b must be >= 1");
  const int n = train.size();
  const int d = model.param_dim();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);

  // Per-coordinate noise std, refreshed at eval points (frozen between).
  Eigen::VectorXd noise_std = Eigen::VectorXd::Zero(d);
  auto refresh = [&](const Eigen::VectorXd& theta) {
    // diag C and tr C from one pass over per-sample gradients; the full
    // d x d covariance is never materialized.
    Eigen::VectorXd sq_sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd g =
          model.sample_grad(theta, train.inputs.row(i).transpose(), train.targets[i]);
      sq_sum += g.cwiseProduct(g);
      mean += g;
    }
    mean /= static_cast<double>(n);
    Eigen::VectorXd diag_c =
        (sq_sum / static_cast<double>(n) - mean.cwiseProduct(mean)) /
        static_cast<double>(b);
    diag_c = diag_c.cwiseMax(0.0);  // clip roundoff negatives
    if (mode == GldMode::Isotropic) {
      noise_std.setConstant(std::sqrt(diag_c.sum() / d));
    } else {
      noise_std = diag_c.cwiseSqrt();
    }
  };

  return run_loop(model, train, eval, theta0, config,
                  [&](Eigen::VectorXd& theta, int iter) {
                    if (iter % config.eval_every == 0) refresh(theta);
                    const Eigen::VectorXd grad =
                        model.weighted_loss_grad(theta, train, uniform);
                    const Eigen::VectorXd xi =
                        noise_std.cwiseProduct(s.gaussian_vector(d));
                    theta += -config.eta * grad + config.eta * xi;
                  });
}

}  // namespace msgd
