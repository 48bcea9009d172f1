#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msgd {

/// Name of the uniform generator, recorded in every run's metadata so
/// results stay auditable.
inline constexpr const char* kGeneratorName = "splitmix64";

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Avalanche (root_seed, label bytes) into one 64-bit stream key.
inline std::uint64_t stream_key(std::uint64_t root_seed, std::string_view label) {
  std::uint64_t k = mix64(root_seed + kGolden);
  for (unsigned char c : label) {
    k = mix64(k ^ (static_cast<std::uint64_t>(c) + kGolden));
  }
  return k;
}

}  // namespace detail

/// Counter-based splittable random stream. Output i is a pure function of
/// (root_seed, label, i), so streams replay exactly and independently of
/// one another; copies advance independently.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string label)
      : root_seed_(root_seed),
        label_(std::move(label)),
        key_(detail::stream_key(root_seed_, label_)),
        counter_(0) {}

  std::uint64_t root_seed() const { return root_seed_; }
  const std::string& label() const { return label_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double next_gaussian() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi_v<double> * u2);
  }

  /// Uniform integer in [0, n). Multiply-shift; bias < n / 2^64.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index len) {
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i) v[i] = next_gaussian();
    return v;
  }

 private:
  std::uint64_t root_seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Derive the stream identified by (root_seed, label).
inline RngStream derive_stream(std::uint64_t root_seed, std::string label) {
  if (label.empty()) throw std::invalid_argument("rng: stream label must be nonempty");
  return RngStream(root_seed, std::move(label));
}

}  // namespace msgd
