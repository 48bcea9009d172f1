#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "msgd/regression_problem.hpp"
#include "msgd/rng.hpp"

namespace msgd {

struct Dataset {
  Eigen::MatrixXd inputs;   // n x p, one row per sample
  Eigen::VectorXd targets;  // length n; +-1 labels for classification

  int size() const { return static_cast<int>(inputs.rows()); }
  int feature_dim() const { return static_cast<int>(inputs.cols()); }
  Dataset subset(const std::vector<int>& rows) const;
};

/// A per-sample-differentiable objective. Both gradient routes exist by
/// design: weighted_loss_grad backpropagates the scalar weighted loss in
/// one pass, sample_grad gives individual columns of the gradient matrix.
class Model {
 public:
  virtual ~Model() = default;

  virtual int param_dim() const = 0;
  virtual int input_dim() const = 0;

  /// Entry i = loss of sample i at theta.
  virtual Eigen::VectorXd loss_vector(const Eigen::VectorXd& theta,
                                      const Dataset& data) const = 0;

  /// Gradient of sum_i w_i * loss_i(theta) without forming the d x n matrix.
  virtual Eigen::VectorXd weighted_loss_grad(const Eigen::VectorXd& theta,
                                             const Dataset& data,
                                             const Eigen::VectorXd& w) const = 0;

  /// Gradient of the loss of a single sample.
  virtual Eigen::VectorXd sample_grad(const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& x, double y) const = 0;

  /// Raw model outputs (used for sign-based classification accuracy).
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& inputs) const = 0;
};

/// l(x, y; theta) = 1/2 (x^T theta - y)^2, optionally plus a ridge term
/// 1/2 * ridge * ||theta||^2 added to every per-sample loss.
class LinearRegressionModel : public Model {
 public:
  explicit LinearRegressionModel(int p, double ridge = 0.0) : p_(p), ridge_(ridge) {}

  int param_dim() const override { return p_; }
  int input_dim() const override { return p_; }
  Eigen::VectorXd loss_vector(const Eigen::VectorXd& theta,
                              const Dataset& data) const override;
  Eigen::VectorXd weighted_loss_grad(const Eigen::VectorXd& theta, const Dataset& data,
                                     const Eigen::VectorXd& w) const override;
  Eigen::VectorXd sample_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                              double y) const override;
  Eigen::VectorXd predict(const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& inputs) const override;

 private:
  int p_;
  double ridge_;
};

/// l(x, y; theta) = log(1 + exp(-y x^T theta)) with labels y in {-1, +1}.
class LogisticRegressionModel : public Model {
 public:
  explicit LogisticRegressionModel(int p) : p_(p) {}

  int param_dim() const override { return p_; }
  int input_dim() const override { return p_; }
  Eigen::VectorXd loss_vector(const Eigen::VectorXd& theta,
                              const Dataset& data) const override;
  Eigen::VectorXd weighted_loss_grad(const Eigen::VectorXd& theta, const Dataset& data,
                                     const Eigen::VectorXd& w) const override;
  Eigen::VectorXd sample_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                              double y) const override;
  Eigen::VectorXd predict(const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& inputs) const override;

 private:
  int p_;
};

enum class MlpLoss { Squared, Logistic };

/// One tanh hidden layer, scalar output. tanh keeps everything smooth so
/// central finite differences stay tight.
class MlpModel : public Model {
 public:
  MlpModel(int p, int hidden, MlpLoss loss);

  int param_dim() const override { return dim_; }
  int input_dim() const override { return p_; }
  int hidden_dim() const { return h_; }
  Eigen::VectorXd loss_vector(const Eigen::VectorXd& theta,
                              const Dataset& data) const override;
  Eigen::VectorXd weighted_loss_grad(const Eigen::VectorXd& theta, const Dataset& data,
                                     const Eigen::VectorXd& w) const override;
  Eigen::VectorXd sample_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                              double y) const override;
  Eigen::VectorXd predict(const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& inputs) const override;

  /// N(0, scale/sqrt(fan_in)) weights, zero biases.
  Eigen::VectorXd init_params(RngStream& s, double scale = 1.0) const;

 private:
  // theta layout: [W1 (h*p, col-major) | b1 (h) | w2 (h) | b2 (1)]
  int p_, h_, dim_;
  MlpLoss loss_;
};

enum class CovRole { SgdCov, Fisher };

struct CovarianceMatrix {
  Eigen::MatrixXd mat;
  CovRole role;
};

double full_loss(const Model& model, const Eigen::VectorXd& theta, const Dataset& data);
Eigen::VectorXd full_gradient(const Model& model, const Eigen::VectorXd& theta,
                              const Dataset& data);

/// d x n matrix of per-sample gradients. Guarded at d*n <= 1e7; larger
/// problems must stay on the weighted-loss route.
Eigen::MatrixXd gradient_matrix(const Model& model, const Eigen::VectorXd& theta,
                                const Dataset& data);

/// C(theta) = (1/b) ((1/n) G G^T - g g^T).
CovarianceMatrix sgd_covariance(const Model& model, const Eigen::VectorXd& theta,
                                const Dataset& data, int b);

/// F(theta) = (1/n) G G^T.
CovarianceMatrix fisher(const Model& model, const Eigen::VectorXd& theta,
                        const Dataset& data);

/// Fraction of sign-correct predictions against +-1 targets.
double classification_accuracy(const Model& model, const Eigen::VectorXd& theta,
                               const Dataset& data);

Dataset generate_regression_data(const RegressionProblem& problem, int n, RngStream& s);

struct ClassificationData {
  Dataset train;
  Dataset test;
};

/// Balanced Gaussian blobs, labels alternate +1/-1 with the centre index.
ClassificationData generate_classification_data(const std::vector<Eigen::VectorXd>& centers,
                                                double spread, int n_train, int n_test,
                                                RngStream& s);

}  // namespace msgd
