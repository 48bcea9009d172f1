#include "msgd/models.hpp"

#include <cmath>
#include <stdexcept>

namespace msgd {

namespace {

constexpr double kMatrixGuard = 1e7;

void check_data(const Model& model, const Dataset& data) {
  if (data.inputs.cols() != model.input_dim()) {
    throw std::invalid_argument("model/data feature dimension mismatch");
  }
  if (data.inputs.rows() != data.targets.size() || data.inputs.rows() < 1) {
    throw std::invalid_argument("dataset inputs/targets mismatch");
  }
}

void check_theta(const Model& model, const Eigen::VectorXd& theta) {
  if (theta.size() != model.param_dim()) {
    throw std::invalid_argument("theta dimension mismatch");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return (z > 0.0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// d/df log(1 + exp(-y f)) = -y / (1 + exp(y f))
double logistic_dloss(double f, double y) { return -y / (1.0 + std::exp(y * f)); }

}  // namespace

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(rows[i]);
    out.targets[static_cast<Eigen::Index>(i)] = targets[rows[i]];
  }
  return out;
}

// ---------------------------------------------------------------- linear

Eigen::VectorXd LinearRegressionModel::loss_vector(const Eigen::VectorXd& theta,
                                                   const Dataset& data) const {
  check_theta(*this, theta);
  check_data(*this, data);
  const Eigen::VectorXd r = data.inputs * theta - data.targets;
  Eigen::VectorXd out = 0.5 * r.array().square();
  if (ridge_ > 0.0) out.array() += 0.5 * ridge_ * theta.squaredNorm();
  return out;
}

Eigen::VectorXd LinearRegressionModel::weighted_loss_grad(const Eigen::VectorXd& theta,
                                                          const Dataset& data,
                                                          const Eigen::VectorXd& w) const {
  check_theta(*this, theta);
  check_data(*this, data);
  if (w.size() != data.inputs.rows()) {
    throw std::invalid_argument("weight vector length mismatch");
  }
  const Eigen::VectorXd r = data.inputs * theta - data.targets;
  Eigen::VectorXd g = data.inputs.transpose() * (w.cwiseProduct(r));
  if (ridge_ > 0.0) g += ridge_ * w.sum() * theta;
  return g;
}

Eigen::VectorXd LinearRegressionModel::sample_grad(const Eigen::VectorXd& theta,
                                                   const Eigen::VectorXd& x,
                                                   double y) const {
  Eigen::VectorXd g = (x.dot(theta) - y) * x;
  if (ridge_ > 0.0) g += ridge_ * theta;
  return g;
}

Eigen::VectorXd LinearRegressionModel::predict(const Eigen::VectorXd& theta,
                                               const Eigen::MatrixXd& inputs) const {
  return inputs * theta;
}

// -------------------------------------------------------------- logistic

Eigen::VectorXd LogisticRegressionModel::loss_vector(const Eigen::VectorXd& theta,
                                                     const Dataset& data) const {
  check_theta(*this, theta);
  check_data(*this, data);
  Eigen::VectorXd out(data.size());
  const Eigen::VectorXd f = data.inputs * theta;
  for (int i = 0; i < data.size(); ++i) out[i] = softplus(-data.targets[i] * f[i]);
  return out;
}

Eigen::VectorXd LogisticRegressionModel::weighted_loss_grad(
    const Eigen::VectorXd& theta, const Dataset& data, const Eigen::VectorXd& w) const {
  check_theta(*this, theta);
  check_data(*this, data);
  if (w.size() != data.inputs.rows()) {
    throw std::invalid_argument("weight vector length mismatch");
  }
  const Eigen::VectorXd f = data.inputs * theta;
  Eigen::VectorXd coeff(data.size());
  for (int i = 0; i < data.size(); ++i) {
    coeff[i] = w[i] * logistic_dloss(f[i], data.targets[i]);
  }
  return data.inputs.transpose() * coeff;
}

Eigen::VectorXd LogisticRegressionModel::sample_grad(const Eigen::VectorXd& theta,
                                                     const Eigen::VectorXd& x,
                                                     double y) const {
  return logistic_dloss(x.dot(theta), y) * x;
}

Eigen::VectorXd LogisticRegressionModel::predict(const Eigen::VectorXd& theta,
                                                 const Eigen::MatrixXd& inputs) const {
  return inputs * theta;
}

// ------------------------------------------------------------------- mlp

MlpModel::MlpModel(int p, int hidden, MlpLoss loss)
    : p_(p), h_(hidden), dim_(hidden * p + 2 * hidden + 1), loss_(loss) {
  if (hidden < 1 || hidden > 32) {
    throw std::invalid_argument("MlpModel: hidden width must be in [1, 32]");
  }
}

namespace {

struct MlpView {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;
};

MlpView mlp_view(const Eigen::VectorXd& theta, int p, int h) {
  return {Eigen::Map<const Eigen::MatrixXd>(theta.data(), h, p),
          Eigen::Map<const Eigen::VectorXd>(theta.data() + h * p, h),
          Eigen::Map<const Eigen::VectorXd>(theta.data() + h * p + h, h),
          theta[h * p + 2 * h]};
}

}  // namespace

Eigen::VectorXd MlpModel::predict(const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& inputs) const {
  check_theta(*this, theta);
  const MlpView v = mlp_view(theta, p_, h_);
  // Z = tanh(W1 X^T + b1), f = Z^T w2 + b2
  Eigen::MatrixXd z = ((v.w1 * inputs.transpose()).colwise() + v.b1).array().tanh();
  return (z.transpose() * v.w2).array() + v.b2;
}

Eigen::VectorXd MlpModel::loss_vector(const Eigen::VectorXd& theta,
                                      const Dataset& data) const {
  check_data(*this, data);
  const Eigen::VectorXd f = predict(theta, data.inputs);
  Eigen::VectorXd out(data.size());
  for (int i = 0; i < data.size(); ++i) {
    if (loss_ == MlpLoss::Squared) {
      const double r = f[i] - data.targets[i];
      out[i] = 0.5 * r * r;
    } else {
      out[i] = softplus(-data.targets[i] * f[i]);
    }
  }
  return out;
}

Eigen::VectorXd MlpModel::weighted_loss_grad(const Eigen::VectorXd& theta,
                                             const Dataset& data,
                                             const Eigen::VectorXd& w) const {
  check_theta(*this, theta);
  check_data(*this, data);
  if (w.size() != data.inputs.rows()) {
    throw std::invalid_argument("weight vector length mismatch");
  }
  const MlpView v = mlp_view(theta, p_, h_);
  const Eigen::MatrixXd z =
      ((v.w1 * data.inputs.transpose()).colwise() + v.b1).array().tanh();
  const Eigen::VectorXd f = (z.transpose() * v.w2).array() + v.b2;

  Eigen::VectorXd g(data.size());  // w_i * dl_i/df_i
  for (int i = 0; i < data.size(); ++i) {
    g[i] = w[i] * ((loss_ == MlpLoss::Squared) ? (f[i] - data.targets[i])
                                               : logistic_dloss(f[i], data.targets[i]));
  }

  // delta = (w2 g^T) (.) (1 - Z^2), h x n
  const Eigen::MatrixXd delta =
      (v.w2 * g.transpose()).array() * (1.0 - z.array().square());

  Eigen::VectorXd grad(dim_);
  Eigen::Map<Eigen::MatrixXd>(grad.data(), h_, p_) = delta * data.inputs;
  Eigen::Map<Eigen::VectorXd>(grad.data() + h_ * p_, h_) = delta.rowwise().sum();
  Eigen::Map<Eigen::VectorXd>(grad.data() + h_ * p_ + h_, h_) = z * g;
  grad[h_ * p_ + 2 * h_] = g.sum();
  return grad;
}

Eigen::VectorXd MlpModel::sample_grad(const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& x, double y) const {
  check_theta(*this, theta);
  const MlpView v = mlp_view(theta, p_, h_);
  const Eigen::VectorXd z = (v.w1 * x + v.b1).array().tanh();
  const double f = v.w2.dot(z) + v.b2;
  const double dldf =
      (loss_ == MlpLoss::Squared) ? (f - y) : logistic_dloss(f, y);
  const Eigen::VectorXd delta =
      dldf * (v.w2.array() * (1.0 - z.array().square())).matrix();

  Eigen::VectorXd grad(dim_);
  Eigen::Map<Eigen::MatrixXd>(grad.data(), h_, p_) = delta * x.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + h_ * p_, h_) = delta;
  Eigen::Map<Eigen::VectorXd>(grad.data() + h_ * p_ + h_, h_) = dldf * z;
  grad[h_ * p_ + 2 * h_] = dldf;
  return grad;
}

Eigen::VectorXd MlpModel::init_params(RngStream& s, double scale) const {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim_);
  const double s1 = scale / std::sqrt(static_cast<double>(p_));
  const double s2 = scale / std::sqrt(static_cast<double>(h_));
  for (int i = 0; i < h_ * p_; ++i) theta[i] = s1 * s.next_gaussian();
  for (int i = 0; i < h_; ++i) theta[h_ * p_ + h_ + i] = s2 * s.next_gaussian();
  return theta;
}

// --------------------------------------------------------- free functions

double full_loss(const Model& model, const Eigen::VectorXd& theta, const Dataset& data) {
  return model.loss_vector(theta, data).mean();
}

Eigen::VectorXd full_gradient(const Model& model, const Eigen::VectorXd& theta,
                              const Dataset& data) {
  const double n = data.size();
  return model.weighted_loss_grad(theta, data,
                                  Eigen::VectorXd::Constant(data.size(), 1.0 / n));
}

Eigen::MatrixXd gradient_matrix(const Model& model, const Eigen::VectorXd& theta,
                                const Dataset& data) {
  const double d = model.param_dim();
  const double n = data.size();
  if (d * n > kMatrixGuard) {
    throw std::invalid_argument("gradient_matrix: d*n exceeds the 1e7 guard");
  }
  Eigen::MatrixXd g(model.param_dim(), data.size());
  for (int i = 0; i < data.size(); ++i) {
    g.col(i) = model.sample_grad(theta, data.inputs.row(i).transpose(), data.targets[i]);
  }
  return g;
}

CovarianceMatrix sgd_covariance(const Model& model, const Eigen::VectorXd& theta,
                                const Dataset& data, int b) {
  if (b < 1) throw std::invalid_argument("sgd_covariance: b must be >= 1");
  const Eigen::MatrixXd g = gradient_matrix(model, theta, data);
  const double n = data.size();
  const Eigen::VectorXd mean = g.rowwise().mean();
  Eigen::MatrixXd c =
      (g * g.transpose() / n - mean * mean.transpose()) / static_cast<double>(b);
  return {std::move(c), CovRole::SgdCov};
}

CovarianceMatrix fisher(const Model& model, const Eigen::VectorXd& theta,
                        const Dataset& data) {
  const Eigen::MatrixXd g = gradient_matrix(model, theta, data);
  const double n = data.size();
  return {g * g.transpose() / n, CovRole::Fisher};
}

double classification_accuracy(const Model& model, const Eigen::VectorXd& theta,
                               const Dataset& data) {
  const Eigen::VectorXd f = model.predict(theta, data.inputs);
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const double pred = (f[i] >= 0.0) ? 1.0 : -1.0;
    if (pred == data.targets[i]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

Dataset generate_regression_data(const RegressionProblem& problem, int n, RngStream& s) {
  if (n < 1) throw std::invalid_argument("generate_regression_data: n must be >= 1");
  Dataset data;
  data.inputs.resize(n, problem.dim());
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = problem.sample_input(s);
    data.inputs.row(i) = x.transpose();
    data.targets[i] = problem.sample_target(x, s);
  }
  return data;
}

namespace {

Dataset blob_dataset(const std::vector<Eigen::VectorXd>& centers, double spread, int n,
                     RngStream& s) {
  const int p = static_cast<int>(centers.front().size());
  Dataset data;
  data.inputs.resize(n, p);
  data.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = i % static_cast<int>(centers.size());
    data.inputs.row(i) = (centers[c] + spread * s.gaussian_vector(p)).transpose();
    data.targets[i] = (c % 2 == 0) ? 1.0 : -1.0;
  }
  return data;
}

}  // namespace

ClassificationData generate_classification_data(
    const std::vector<Eigen::VectorXd>& centers, double spread, int n_train, int n_test,
    RngStream& s) {
  if (centers.size() < 2) {
    throw std::invalid_argument("generate_classification_data: need >= 2 centers");
  }
  for (const auto& c : centers) {
    if (c.size() != centers.front().size()) {
      throw std::invalid_argument("generate_classification_data: center dims differ");
    }
  }
  ClassificationData out;
  out.train = blob_dataset(centers, spread, n_train, s);
  out.test = blob_dataset(centers, spread, n_test, s);
  return out;
}

}  // namespace msgd
