#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msgd/rng.hpp"

using msgd::derive_stream;
using msgd::RngStream;

TEST_CASE("same (seed, label) replays bit-identically") {
  RngStream a = derive_stream(7, "a");
  RngStream b = derive_stream(7, "a");
  for (int i = 0; i < 100; ++i) CHECK(a.next_double() == b.next_double());
}

TEST_CASE("distinct labels give distinct sequences") {
  RngStream a = derive_stream(7, "a");
  RngStream b = derive_stream(7, "b");
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_double() != b.next_double()) ++differing;
  }
  CHECK(differing > 90);
}

TEST_CASE("distinct seeds give distinct sequences") {
  RngStream a = derive_stream(7, "a");
  RngStream b = derive_stream(8, "a");
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_double() != b.next_double()) ++differing;
  }
  CHECK(differing > 90);
}

TEST_CASE("empty label is rejected") {
  CHECK_THROWS_AS(derive_stream(1, ""), std::invalid_argument);
}

TEST_CASE("uniform output lands in [0,1)") {
  RngStream s = derive_stream(3, "u");
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("next_below stays in range and hits all residues") {
  RngStream s = derive_stream(3, "below");
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = s.next_below(7);
    REQUIRE(v < 7);
    ++counts[static_cast<int>(v)];
  }
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("gaussian moments match the standard normal at CLT precision") {
  const long m = 1000000;
  RngStream s = derive_stream(123, "gauss");
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (long i = 0; i < m; ++i) {
    const double z = s.next_gaussian();
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  const double md = static_cast<double>(m);
  const double mean = sum / md;
  const double var = sum2 / md - mean * mean;
  const double kurt = sum4 / md / (var * var) - 3.0;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(md));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0) / std::sqrt(md));
  CHECK(std::abs(kurt) < 4.0 * std::sqrt(24.0) / std::sqrt(md));
}

TEST_CASE("two streams pass a two-sample mean test") {
  const long m = 1000000;
  RngStream a = derive_stream(9, "first");
  RngStream b = derive_stream(9, "second");
  double sa = 0.0, sb = 0.0;
  for (long i = 0; i < m; ++i) {
    sa += a.next_gaussian();
    sb += b.next_gaussian();
  }
  CHECK(std::abs(sa / m - sb / m) < 8.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("counter advances deterministically per draw") {
  RngStream s = derive_stream(5, "ctr");
  CHECK(s.counter() == 0);
  s.next_u64();
  CHECK(s.counter() == 1);
  s.next_gaussian();  // two uniforms
  CHECK(s.counter() == 3);
}
