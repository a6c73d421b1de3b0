#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/error.hpp"
#include "latentcloud/latent.hpp"
#include "oracles.hpp"

using namespace latentcloud;

namespace {

std::vector<LatentVector> random_latents(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<LatentVector> v(n);
  for (auto& row : v) row = oracle::random_vector(rng, k);
  return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

const SliderValues kZero{};

}  // namespace

TEST_CASE("feature edit") {
  const LatentVector f{1, 2};
  CHECK(feature_edit(f, LatentVector{0.5, -1}) == LatentVector{1.5, 1});
  CHECK(feature_edit(f, LatentVector{0, 0}) == f);
  CHECK_THROWS_AS(feature_edit(f, LatentVector{1}), DimensionError);

  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto base = oracle::random_vector(rng, 16);
    const auto t = oracle::random_vector(rng, 16);
    const auto u = oracle::random_vector(rng, 16);
    LatentVector neg(t);
    for (double& v : neg) v = -v;
    CHECK(max_abs_diff(feature_edit(feature_edit(base, t), neg), base) <= 1e-12);
    CHECK(max_abs_diff(feature_edit(feature_edit(base, t), u),
                       feature_edit(base, feature_edit(t, u))) <= 1e-12);
  }
}

TEST_CASE("edit state tracks x = f + t") {
  EditState s({1, 2, 3});
  CHECK(s.edited == LatentVector{1, 2, 3});
  s.set_transform({1, 0, -1});
  CHECK(s.edited == LatentVector{2, 2, 2});
  s.set_transform({0, 0, 0});
  CHECK(s.edited == s.base);
  CHECK_THROWS_AS(s.set_transform({1}), DimensionError);
}

TEST_CASE("interpolation") {
  SUBCASE("one-hot weights reproduce the row exactly") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng.below(5);
      const auto v = random_latents(rng, n, 12);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> w(n, 0.0);
        w[i] = 1.0 + rng.uniform(0.0, 3.0);
        const auto h = interpolate(v, w);
        CHECK(std::memcmp(h.data(), v[i].data(), h.size() * sizeof(double)) == 0);
      }
    }
  }
  SUBCASE("midpoint and symmetry") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const auto v = random_latents(rng, 2, 10);
      const std::vector<double> w{1, 1};
      const auto h = interpolate(v, w);
      const std::vector<LatentVector> swapped{v[1], v[0]};
      CHECK(max_abs_diff(h, interpolate(swapped, w)) <= 1e-12);
      for (std::size_t j = 0; j < 10; ++j) {
        CHECK(std::abs(h[j] - 0.5 * (v[0][j] + v[1][j])) <= 1e-12);
      }
    }
  }
  SUBCASE("scale invariance, convex combination and hull bound") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng.below(6);
      const auto v = random_latents(rng, n, 8);
      std::vector<double> w(n);
      for (double& x : w) x = rng.uniform(0.0, 2.0);
      std::vector<double> scaled(w);
      for (double& x : scaled) x *= 3.0;
      const auto h = interpolate(v, w);
      CHECK(max_abs_diff(h, interpolate(v, scaled)) <= 1e-12);
      double total = 0;
      for (double x : w) total += x;
      for (std::size_t j = 0; j < 8; ++j) {
        double expected = 0, lo = v[0][j], hi = v[0][j];
        for (std::size_t i = 0; i < n; ++i) {
          expected += w[i] / total * v[i][j];
          lo = std::min(lo, v[i][j]);
          hi = std::max(hi, v[i][j]);
        }
        CHECK(std::abs(h[j] - expected) <= 1e-12);
        CHECK(h[j] >= lo - 1e-12);
        CHECK(h[j] <= hi + 1e-12);
      }
    }
    const std::vector<LatentVector> three{{0, 3}, {3, 0}, {6, 6}};
    const auto a = interpolate(three, std::vector<double>{2, 2, 2});
    const auto b = interpolate(three, std::vector<double>{1, 1, 1});
    CHECK(max_abs_diff(a, b) <= 1e-12);
    CHECK(a[0] == doctest::Approx(3.0));
  }
  SUBCASE("errors") {
    const std::vector<LatentVector> v{{0, 1}, {1, 0}};
    CHECK_THROWS_AS(interpolate(v, std::vector<double>{0, 0}), DegenerateWeightsError);
    CHECK_THROWS_AS(interpolate(v, std::vector<double>{-1, 2}), DegenerateWeightsError);
    CHECK_THROWS_AS(interpolate(v, std::vector<double>{1}), DimensionError);
    const std::vector<LatentVector> one{{0, 1}};
    CHECK_THROWS_AS(interpolate(one, std::vector<double>{1}), DimensionError);
    const std::vector<LatentVector> ragged{{0, 1}, {1}};
    CHECK_THROWS_AS(interpolate(ragged, std::vector<double>{1, 1}), DimensionError);
  }
}

TEST_CASE("latent statistics") {
  const std::vector<LatentVector> single{{3, -1}};
  const auto s1 = latent_stats(single);
  CHECK(s1.min == single[0]);
  CHECK(s1.max == single[0]);
  CHECK(s1.count == 1);

  const std::vector<LatentVector> two{{0, 5}, {2, 1}};
  const auto s2 = latent_stats(two);
  CHECK(s2.min == LatentVector{0, 1});
  CHECK(s2.max == LatentVector{2, 5});

  Rng rng(5);
  const auto many = random_latents(rng, 200, 16);
  const auto s = latent_stats(many);
  for (std::size_t j = 0; j < 16; ++j) {
    double lo = many[0][j], hi = many[0][j];
    for (const auto& v : many) {
      lo = v[j] < lo ? v[j] : lo;
      hi = v[j] > hi ? v[j] : hi;
      CHECK(s.min[j] <= v[j]);
      CHECK(v[j] <= s.max[j]);
    }
    CHECK(s.min[j] == lo);
    CHECK(s.max[j] == hi);
  }

  CHECK_THROWS_AS(latent_stats(std::vector<LatentVector>{}), DimensionError);
  const std::vector<LatentVector> ragged{{0, 1}, {1}};
  CHECK_THROWS_AS(latent_stats(ragged), DimensionError);
}

TEST_CASE("slider mapping") {
  LatentStats stats;
  stats.min.assign(16, -1.0);
  stats.max.assign(16, 1.0);
  stats.min[0] = -2;
  stats.max[0] = 2;
  stats.count = 10;

  SUBCASE("centered controls give the zero vector") {
    for (std::size_t offset : {0u, 3u, 8u}) {
      const auto t = slider_to_t(stats, kZero, kZero, offset);
      REQUIRE(t.size() == 16);
      for (double v : t) CHECK(v == 0.0);
    }
  }
  SUBCASE("full deflection is half the interval") {
    SliderValues s{};
    s[0] = 1;
    const auto t = slider_to_t(stats, s, kZero, 0);
    CHECK(t[0] == 2.0);
    for (std::size_t j = 1; j < 16; ++j) CHECK(t[j] == 0.0);
  }
  SUBCASE("formula with knobs and offsets") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      LatentStats st;
      for (int j = 0; j < 20; ++j) {
        const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
        st.min.push_back(std::min(a, b));
        st.max.push_back(std::max(a, b));
      }
      SliderValues s, q;
      for (auto& x : s) x = rng.uniform(-1, 1);
      for (auto& x : q) x = rng.uniform(-0.1, 0.1);
      const std::size_t offset = rng.below(13);
      const auto t = slider_to_t(st, s, q, offset);
      for (std::size_t i = 0; i < 20; ++i) {
        if (i >= offset && i < offset + 8) {
          const std::size_t j = i - offset;
          CHECK(std::abs(t[i] - (s[j] + q[j]) * (st.max[i] - st.min[i]) / 2) <= 1e-12);
        } else {
          CHECK(t[i] == 0.0);
        }
      }
    }
  }
  SUBCASE("offset 8 moves the controlled block") {
    SliderValues s;
    s.fill(1.0);
    const auto t = slider_to_t(stats, s, kZero, 8);
    for (std::size_t j = 0; j < 8; ++j) CHECK(t[j] == 0.0);
    for (std::size_t j = 8; j < 16; ++j) CHECK(t[j] == 1.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(slider_to_t(stats, kZero, kZero, 9), DimensionError);
    CHECK_THROWS_AS(slider_to_t(stats, std::vector<double>(7, 0.0), kZero, 0), DimensionError);
    SliderValues s{};
    s[2] = 1.5;
    CHECK_THROWS_AS(slider_to_t(stats, s, kZero, 0), ConfigError);
    SliderValues q{};
    q[0] = 0.2;
    CHECK_THROWS_AS(slider_to_t(stats, kZero, q, 0), ConfigError);
  }
}

TEST_CASE("centered controls decode to the base cloud bitwise") {
  AEConfig c;
  c.input_points = 32;
  c.output_points = 32;
  c.latent_size = 12;
  c.encoder_widths = {16, 32};
  c.decoder_widths = {32, 64};
  const AEModel m = make_model(c);
  Rng rng(7);
  const auto latents = random_latents(rng, 10, 12);
  const auto stats = latent_stats(latents);
  for (std::size_t offset : {0u, 4u}) {
    const auto t = slider_to_t(stats, kZero, kZero, offset);
    const auto x = feature_edit(latents[3], t);
    CHECK(decode(m, x) == decode(m, latents[3]));
  }
  std::vector<double> w(10, 0.0);
  w[5] = 1;
  CHECK(decode(m, interpolate(latents, w)) == decode(m, latents[5]));
}
