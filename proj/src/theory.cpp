#include "msgd/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace msgd {

const char* to_string(RecursionKind kind) {
  switch (kind) {
    case RecursionKind::SmallBatchSgd: return "small_batch_sgd";
    case RecursionKind::TheoremSubsample: return "theorem_subsample";
    case RecursionKind::TheoremGaussian: return "theorem_gaussian";
  }
  throw std::logic_error("unknown RecursionKind");
}

RecursionKind recursion_kind_from_string(const std::string& name) {
  for (RecursionKind k : {RecursionKind::SmallBatchSgd, RecursionKind::TheoremSubsample,
                          RecursionKind::TheoremGaussian}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown recursion kind: " + name);
}

double excess_risk(const Eigen::VectorXd& theta, const RegressionProblem& problem) {
  const Eigen::VectorXd d = theta - problem.theta_star();
  return 0.5 * d.dot(problem.sigma() * d);
}

double stability_limit(const RegressionProblem& problem, int b) {
  if (b < 1) throw std::invalid_argument("stability_limit: b must be >= 1");
  return 2.0 * b / (problem.r_squared() + (b - 1) * problem.lambda());
}

BoundConstants theorem1_constants(const RegressionProblem& problem, int b, double eta,
                                  const Eigen::VectorXd& theta0) {
  const double limit = stability_limit(problem, b);
  if (!(eta > 0.0) || eta >= limit) {
    throw std::invalid_argument(
        "theorem1: step size violates the stability condition eta < 2b/(R^2+(b-1)lambda)");
  }
  const double kappa = (problem.r_squared() + (b - 1) * problem.lambda()) / b;
  const double d = problem.dim();
  BoundConstants c;
  c.c1 = problem.sigma2() * d / (2.0 - eta * kappa);
  const Eigen::VectorXd delta0 = theta0 - problem.theta_star();
  const double init = delta0.dot(problem.sigma().llt().solve(delta0));
  c.c2 = 0.5 * (1.0 + kappa * eta * d / (2.0 * b)) * init;
  return c;
}

double theorem1_bound(const RegressionProblem& problem, int b, double eta,
                      const Eigen::VectorXd& theta0, long n) {
  const BoundConstants c = theorem1_constants(problem, b, eta, theta0);
  const double np1 = static_cast<double>(n) + 1.0;
  return c.c1 / np1 + c.c2 / (np1 * np1);
}

AveragedRun run_online_recursion(const RegressionProblem& problem, int B, int b,
                                 double eta, long n_iters, RecursionKind kind,
                                 const std::vector<long>& log_points,
                                 const Eigen::VectorXd& theta0, RngStream& s) {
  const double limit = stability_limit(problem, b);
  if (!(eta > 0.0) || eta >= limit) {
    throw std::invalid_argument(
        "run_online_recursion: step size violates the stability condition "
        "eta < 2b/(R^2+(b-1)lambda)");
  }
  const int batch = (kind == RecursionKind::SmallBatchSgd) ? b : B;
  if (b < 1 || batch < b) {
    throw std::invalid_argument("run_online_recursion: need 1 <= b <= B");
  }
  if (theta0.size() != problem.dim()) {
    throw std::invalid_argument("run_online_recursion: theta0 dimension mismatch");
  }
  for (std::size_t i = 0; i < log_points.size(); ++i) {
    if (log_points[i] < 0 || log_points[i] > n_iters ||
        (i > 0 && log_points[i] <= log_points[i - 1])) {
      throw std::invalid_argument("run_online_recursion: bad log points");
    }
  }

  const int p = problem.dim();
  const double bd = b, Bd = batch;
  // Gaussian weight spread reproducing the subsample covariance.
  const double gauss_factor =
      (batch > b) ? std::sqrt((Bd - bd) / (bd * Bd * (Bd - 1.0))) : 0.0;

  AveragedRun run;
  run.kind = kind;
  run.B = batch;
  run.b = b;
  run.eta = eta;
  run.iters = n_iters;

  const bool identity_sigma = problem.sigma_is_identity();
  const double noise_std = std::sqrt(problem.sigma2());
  const Eigen::VectorXd& theta_star = problem.theta_star();

  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd theta_bar = theta0;  // running average of theta_0..theta_k
  Eigen::MatrixXd x(p, batch);
  Eigen::MatrixXd x_buf(p, batch);
  Eigen::VectorXd y(batch);
  Eigen::VectorXd w(batch);
  Eigen::VectorXd residual(batch);
  Eigen::VectorXd update(p);
  std::vector<int> pool(batch);

  std::size_t next_log = 0;
  auto maybe_log = [&](long k) {
    while (next_log < log_points.size() && log_points[next_log] == k) {
      run.risk_curve.emplace_back(k, excess_risk(theta_bar, problem));
      ++next_log;
    }
  };
  maybe_log(0);

  for (long k = 1; k <= n_iters; ++k) {
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < p; ++i) x(i, j) = s.next_gaussian();
    }
    if (!identity_sigma) {
      x_buf.noalias() = problem.chol_lower() * x;
      x.swap(x_buf);
    }
    for (int j = 0; j < batch; ++j) {
      y[j] = theta_star.dot(x.col(j)) + noise_std * s.next_gaussian();
    }
    switch (kind) {
      case RecursionKind::SmallBatchSgd:
        w.setConstant(1.0 / bd);
        break;
      case RecursionKind::TheoremSubsample: {
        w.setZero();
        for (int i = 0; i < batch; ++i) pool[i] = i;
        for (int i = 0; i < b; ++i) {
          const int j = i + static_cast<int>(
                                s.next_below(static_cast<std::uint64_t>(batch - i)));
          std::swap(pool[i], pool[j]);
          w[pool[i]] = 1.0 / bd;
        }
        break;
      }
      case RecursionKind::TheoremGaussian: {
        for (int j = 0; j < batch; ++j) w[j] = s.next_gaussian();
        w.array() -= w.mean();
        w = (gauss_factor * w).array() + 1.0 / Bd;
        break;
      }
    }
    // theta <- theta - eta sum_r w_r x_r (x_r^T theta - y_r)
    residual.noalias() = x.transpose() * theta;
    residual -= y;
    residual.array() *= w.array();
    update.noalias() = x * residual;
    theta -= eta * update;
    theta_bar = (static_cast<double>(k) * theta_bar + theta) / (k + 1.0);
    maybe_log(k);
  }

  run.theta_bar = std::move(theta_bar);
  return run;
}

}  // namespace msgd
