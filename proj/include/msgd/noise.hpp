#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "msgd/rng.hpp"

namespace msgd {

/// The sampling-noise families. The first two are the mini-batch SGD
/// schemes; GaussianCov / GaussianFisher are the Gaussian surrogates with
/// the SGD covariance resp. scaled Fisher; Bernoulli keeps only the
/// diagonal; SparseGaussianFisher estimates the Fisher on a sub-batch of
/// size B; the Theorem kinds weight a fresh batch of size B so that a
/// large-batch run mimics small-batch SGD at batch b.
enum class NoiseKind {
  SgdWithReplacement,
  SgdWithoutReplacement,
  GaussianCov,
  GaussianFisher,
  Bernoulli,
  SparseGaussianFisher,
  TheoremSubsample,
  TheoremGaussian,
};

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);
bool kind_uses_outer_batch(NoiseKind kind);

struct SamplingSpec {
  int n = 0;                  // number of weighted losses
  int b = 1;                  // effective (small) batch size
  std::optional<int> B;       // outer batch size, only for B-kinds
  NoiseKind kind = NoiseKind::SgdWithReplacement;
};

/// Throws std::invalid_argument naming the violated condition.
void validate(const SamplingSpec& spec);

/// Length of the weight vector this spec draws (B for Theorem kinds, n
/// otherwise).
int vector_length(const SamplingSpec& spec);

struct SamplingVector {
  Eigen::VectorXd weights;
};

struct SamplingNoise {
  Eigen::VectorXd values;
};

/// Closed-form Var[V] for the spec's kind.
Eigen::MatrixXd theoretical_sampling_cov(const SamplingSpec& spec);

/// One draw of the sampling vector W with E[W] = (1/len) * ones.
SamplingVector draw_sampling_vector(const SamplingSpec& spec, RngStream& s);

/// V = W - (1/len) * ones.
SamplingNoise to_noise(const SamplingVector& w);

/// Convenience: draw and centre in one call.
inline SamplingNoise draw_sampling_noise(const SamplingSpec& spec, RngStream& s) {
  return to_noise(draw_sampling_vector(spec, s));
}

struct MomentReport {
  SamplingSpec spec;
  long draw_count = 0;
  Eigen::VectorXd empirical_mean;
  Eigen::MatrixXd empirical_cov;
  double max_abs_mean_dev = 0.0;
  /// Largest |mean_i| / (sigma_i / sqrt(M)); the 4-sigma convention makes
  /// the pass threshold 4.
  double max_mean_dev_in_se = 0.0;
  /// ||emp - theo||_F / ||theo||_F (absolute ||emp||_F if the target is 0).
  double frob_rel_cov_dev = 0.0;
  /// Only for SparseGaussianFisher: deviation against the full
  /// (off-diagonal included) small-batch SGD covariance, reported next to
  /// the declared diagonal target.
  std::optional<double> frob_rel_cov_dev_vs_full_sgd;
};

/// Monte Carlo moments over M draws compared against
/// theoretical_sampling_cov. Requires M >= 1000.
MomentReport empirical_moments(const SamplingSpec& spec, RngStream& s, long draws);

}  // namespace msgd
