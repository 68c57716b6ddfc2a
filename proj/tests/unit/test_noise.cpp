#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "tadam/noise.hpp"
#include "tadam/random.hpp"

using namespace tadam;

namespace {
double sample_variance(double nu, double scale, int n, std::uint64_t seed) {
  auto rng = make_stream(seed, Stream::NoiseMagnitude);
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_student_t(nu, scale, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  return (s2 - n * mean * mean) / (n - 1);
}
}  // namespace

TEST_CASE("zero scale always draws zero") {
  auto rng = make_stream(1, Stream::NoiseMagnitude);
  for (int i = 0; i < 1000; ++i) CHECK(sample_student_t(1.0, 0.0, rng) == 0.0);
}

TEST_CASE("student-t variance matches the normal limit for huge nu") {
  CHECK(sample_variance(1e6, 0.3, 100000, 4) == doctest::Approx(0.09).epsilon(0.05));
}

TEST_CASE("student-t variance with three degrees of freedom") {
  CHECK(sample_variance(3.0, 1.0, 100000, 2) == doctest::Approx(3.0).epsilon(0.10));
}

TEST_CASE("student-t rejects bad parameters") {
  auto rng = make_stream(1, Stream::NoiseMagnitude);
  CHECK_THROWS_AS(sample_student_t(0.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_student_t(1.0, -1.0, rng), std::invalid_argument);
}

TEST_CASE("uncorrupted datasets keep clean targets") {
  auto d = make_dataset(500, {1.0, 0.05, 0}, 3);
  CHECK(d.size() == 500);
  CHECK(d.ts == d.clean_ts);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.clean_ts[i] == ground_truth(d.xs[i]));
    CHECK(d.xs[i] >= 0.0);
    CHECK(d.xs[i] < 1.0);
    CHECK_FALSE(d.corrupted[i]);
  }
  auto z = make_dataset(500, {1.0, 0.0, 100}, 3);
  CHECK(z.ts == z.clean_ts);
}

TEST_CASE("corrupted fraction tracks p") {
  auto d = make_dataset(100000, {1.0, 0.05, 50}, 9);
  double frac = 0;
  for (bool c : d.corrupted) frac += c;
  frac /= static_cast<double>(d.size());
  CHECK(std::abs(frac - 0.5) < 0.01);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < d.size(); ++i) changed += d.ts[i] != d.clean_ts[i];
  CHECK(changed <= static_cast<std::size_t>(frac * d.size()));
}

TEST_CASE("mask and inputs do not depend on noise shape") {
  auto a = make_dataset(2000, {1.0, 0.05, 30}, 5);
  auto b = make_dataset(2000, {2.0, 0.03, 30}, 5);
  CHECK(a.xs == b.xs);
  CHECK(a.corrupted == b.corrupted);
  CHECK(a.ts != b.ts);
  auto c = make_dataset(2000, {1.0, 0.05, 30}, 6);
  CHECK(a.xs != c.xs);
  auto again = make_dataset(2000, {1.0, 0.05, 30}, 5);
  CHECK(a.ts == again.ts);
}

TEST_CASE("noise spec validation") {
  CHECK_THROWS_AS((NoiseSpec{1.0, 0.05, 101}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((NoiseSpec{1.0, 0.05, -1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((NoiseSpec{0.0, 0.05, 10}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_dataset(0, {}, 0), std::invalid_argument);
}

TEST_CASE("dataset csv round trip") {
  auto d = make_dataset(50, {1.0, 0.05, 40}, 1);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  auto back = read_dataset_csv(ss);
  CHECK(back.xs == d.xs);
  CHECK(back.ts == d.ts);
  CHECK(back.clean_ts == d.clean_ts);
  CHECK(back.corrupted == d.corrupted);
}

TEST_CASE("streams are deterministic and distinct") {
  auto a = make_stream(1, Stream::Inputs);
  auto b = make_stream(1, Stream::Inputs);
  auto c = make_stream(1, Stream::Shuffle);
  auto d = make_stream(2, Stream::Inputs);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
  auto e = make_stream(0, Stream::Gradients);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(e);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_index(e, 7) < 7u);
  }
}
