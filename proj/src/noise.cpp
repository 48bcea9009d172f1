#include "msgd/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "msgd/stats.hpp"

namespace msgd {

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::SgdWithReplacement: return "sgd_with_replacement";
    case NoiseKind::SgdWithoutReplacement: return "sgd_without_replacement";
    case NoiseKind::GaussianCov: return "gaussian_cov";
    case NoiseKind::GaussianFisher: return "gaussian_fisher";
    case NoiseKind::Bernoulli: return "bernoulli";
    case NoiseKind::SparseGaussianFisher: return "sparse_gaussian_fisher";
    case NoiseKind::TheoremSubsample: return "theorem_subsample";
    case NoiseKind::TheoremGaussian: return "theorem_gaussian";
  }
  throw std::logic_error("unknown NoiseKind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
  for (NoiseKind k :
       {NoiseKind::SgdWithReplacement, NoiseKind::SgdWithoutReplacement,
        NoiseKind::GaussianCov, NoiseKind::GaussianFisher, NoiseKind::Bernoulli,
        NoiseKind::SparseGaussianFisher, NoiseKind::TheoremSubsample,
        NoiseKind::TheoremGaussian}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown noise kind: " + name);
}

bool kind_uses_outer_batch(NoiseKind kind) {
  return kind == NoiseKind::SparseGaussianFisher ||
         kind == NoiseKind::TheoremSubsample || kind == NoiseKind::TheoremGaussian;
}

void validate(const SamplingSpec& spec) {
  const bool theorem_kind = spec.kind == NoiseKind::TheoremSubsample ||
                            spec.kind == NoiseKind::TheoremGaussian;
  if (!theorem_kind) {
    if (spec.n < 1) throw std::invalid_argument("sampling spec: n must be >= 1");
    if (spec.b < 1 || spec.b > spec.n) {
      throw std::invalid_argument("sampling spec: need 1 <= b <= n");
    }
  }
  if (kind_uses_outer_batch(spec.kind)) {
    if (!spec.B) {
      throw std::invalid_argument("sampling spec: kind requires outer batch size B");
    }
    if (spec.b < 1 || spec.b > *spec.B) {
      throw std::invalid_argument("sampling spec: need 1 <= b <= B");
    }
  }
  if (spec.kind == NoiseKind::SgdWithoutReplacement && spec.n == 1 && spec.b < spec.n) {
    throw std::invalid_argument("sampling spec: without-replacement needs n >= 2");
  }
}

int vector_length(const SamplingSpec& spec) {
  if (spec.kind == NoiseKind::TheoremSubsample ||
      spec.kind == NoiseKind::TheoremGaussian) {
    return *spec.B;
  }
  return spec.n;
}

namespace {

Eigen::MatrixXd centered_projector_cov(int len, double factor) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(len, len, -factor / len);
  cov.diagonal().array() += factor;
  return cov;
}

// Partial Fisher-Yates: first `pick` entries of a shuffled 0..len-1.
std::vector<int> sample_without_replacement(int len, int pick, RngStream& s) {
  std::vector<int> idx(len);
  for (int i = 0; i < len; ++i) idx[i] = i;
  for (int i = 0; i < pick; ++i) {
    const int j = i + static_cast<int>(s.next_below(static_cast<std::uint64_t>(len - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(pick);
  return idx;
}

Eigen::VectorXd centered_gaussian(int len, double scale, RngStream& s) {
  Eigen::VectorXd eps = s.gaussian_vector(len);
  // (I - ones*ones^T/len) eps applied as eps - mean(eps), O(len).
  eps.array() -= eps.mean();
  return scale * eps;
}

}  // namespace

Eigen::MatrixXd theoretical_sampling_cov(const SamplingSpec& spec) {
  validate(spec);
  const double n = spec.n;
  const double b = spec.b;
  switch (spec.kind) {
    case NoiseKind::SgdWithReplacement:
    case NoiseKind::GaussianCov:
      return centered_projector_cov(spec.n, 1.0 / (b * n));
    case NoiseKind::SgdWithoutReplacement: {
      if (spec.n == spec.b) return Eigen::MatrixXd::Zero(spec.n, spec.n);
      const double factor = (n - b) / (b * n * (n - 1.0));
      return centered_projector_cov(spec.n, factor);
    }
    case NoiseKind::GaussianFisher:
      return Eigen::MatrixXd::Identity(spec.n, spec.n) / (b * n);
    case NoiseKind::Bernoulli:
      return Eigen::MatrixXd::Identity(spec.n, spec.n) * ((n - b) / (b * n * n));
    case NoiseKind::SparseGaussianFisher:
      // Diagonal of the small-batch SGD covariance; the construction's
      // independent Gaussian factors kill the off-diagonal entries.
      return Eigen::MatrixXd::Identity(spec.n, spec.n) *
             ((1.0 / (b * n)) * (1.0 - 1.0 / n));
    case NoiseKind::TheoremSubsample:
    case NoiseKind::TheoremGaussian: {
      const int len = *spec.B;
      const double big = len;
      if (spec.b == len) return Eigen::MatrixXd::Zero(len, len);
      const double factor = (big - b) / (b * big * (big - 1.0));
      return centered_projector_cov(len, factor);
    }
  }
  throw std::logic_error("unknown NoiseKind");
}

SamplingVector draw_sampling_vector(const SamplingSpec& spec, RngStream& s) {
  validate(spec);
  const int n = spec.n;
  const double bd = spec.b;
  switch (spec.kind) {
    case NoiseKind::SgdWithReplacement: {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < spec.b; ++k) {
        w[static_cast<int>(s.next_below(static_cast<std::uint64_t>(n)))] += 1.0 / bd;
      }
      return {std::move(w)};
    }
    case NoiseKind::SgdWithoutReplacement: {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      for (int i : sample_without_replacement(n, spec.b, s)) w[i] = 1.0 / bd;
      return {std::move(w)};
    }
    case NoiseKind::GaussianCov: {
      Eigen::VectorXd w = centered_gaussian(n, 1.0 / std::sqrt(bd * n), s);
      w.array() += 1.0 / n;
      return {std::move(w)};
    }
    case NoiseKind::GaussianFisher: {
      Eigen::VectorXd w = s.gaussian_vector(n) / std::sqrt(bd * n);
      w.array() += 1.0 / n;
      return {std::move(w)};
    }
    case NoiseKind::Bernoulli: {
      const double p = bd / n;
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = (s.next_double() < p) ? 1.0 / bd : 0.0;
      return {std::move(w)};
    }
    case NoiseKind::SparseGaussianFisher: {
      // sqrt(B/b) * V_sgd(B) (.) eps, on top of the uniform mean weights.
      const int big = *spec.B;
      SamplingSpec inner{n, big, std::nullopt, NoiseKind::SgdWithReplacement};
      Eigen::VectorXd v = to_noise(draw_sampling_vector(inner, s)).values;
      const double scale = std::sqrt(static_cast<double>(big) / bd);
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = 1.0 / n + scale * v[i] * s.next_gaussian();
      return {std::move(w)};
    }
    case NoiseKind::TheoremSubsample: {
      const int len = *spec.B;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(len);
      for (int i : sample_without_replacement(len, spec.b, s)) w[i] = 1.0 / bd;
      return {std::move(w)};
    }
    case NoiseKind::TheoremGaussian: {
      const int len = *spec.B;
      const double big = len;
      double factor = 0.0;
      if (spec.b < len) factor = std::sqrt((big - bd) / (bd * big * (big - 1.0)));
      Eigen::VectorXd w = centered_gaussian(len, factor, s);
      w.array() += 1.0 / big;
      return {std::move(w)};
    }
  }
  throw std::logic_error("unknown NoiseKind");
}

SamplingNoise to_noise(const SamplingVector& w) {
  const auto len = w.weights.size();
  return {w.weights.array() - 1.0 / static_cast<double>(len)};
}

MomentReport empirical_moments(const SamplingSpec& spec, RngStream& s, long draws) {
  validate(spec);
  if (draws < 1000) {
    throw std::invalid_argument("empirical_moments: need at least 1000 draws");
  }
  const int len = vector_length(spec);
  MomentAccumulator acc(len);
  for (long k = 0; k < draws; ++k) {
    acc.add(draw_sampling_noise(spec, s).values);
  }

  MomentReport report;
  report.spec = spec;
  report.draw_count = draws;
  report.empirical_mean = acc.mean();
  report.empirical_cov = acc.covariance();
  report.max_abs_mean_dev = report.empirical_mean.cwiseAbs().maxCoeff();

  const Eigen::MatrixXd theo = theoretical_sampling_cov(spec);
  const double root_m = std::sqrt(static_cast<double>(draws));
  double worst = 0.0;
  for (int i = 0; i < len; ++i) {
    const double sigma = std::sqrt(theo(i, i));
    if (sigma > 0.0) {
      worst = std::max(worst, std::abs(report.empirical_mean[i]) / (sigma / root_m));
    }
  }
  report.max_mean_dev_in_se = worst;

  const double theo_norm = theo.norm();
  report.frob_rel_cov_dev = (theo_norm > 0.0)
                                ? (report.empirical_cov - theo).norm() / theo_norm
                                : report.empirical_cov.norm();

  if (spec.kind == NoiseKind::SparseGaussianFisher) {
    SamplingSpec sgd{spec.n, spec.b, std::nullopt, NoiseKind::SgdWithReplacement};
    report.frob_rel_cov_dev_vs_full_sgd =
        frob_rel_dist(report.empirical_cov, theoretical_sampling_cov(sgd));
  }
  return report;
}

}  // namespace msgd
