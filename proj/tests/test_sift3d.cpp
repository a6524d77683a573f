/*
 * Copyright 2026 The FlyAct Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "flyact/rng.hpp"
#include "flyact/sift3d.hpp"
#include "test_util.hpp"

using namespace flyact;

namespace {

constexpr double kPi = std::numbers::pi;

FrameVolume random_volume(int n, std::uint64_t seed, double scale = 1.0) {
  FrameVolume vol(n, n, n);
  SplitMix64 rng(seed);
  for (double& v : vol.data) v = scale * rng.uniform01();
  return vol;
}

GradientVolume empty_gradients(int n) {
  GradientVolume g;
  g.width = g.height = g.num_frames = n;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  g.la.assign(total, 0.0);
  g.lb.assign(total, 0.0);
  g.lt.assign(total, 0.0);
  return g;
}

// gradient field from per-voxel polar coordinates
void set_polar(GradientVolume& g, std::size_t i, double magnitude, double theta, double phi) {
  g.la[i] = magnitude * std::cos(phi) * std::cos(theta);
  g.lb[i] = magnitude * std::cos(phi) * std::sin(theta);
  g.lt[i] = magnitude * std::sin(phi);
}

std::multiset<double> as_multiset(const std::vector<double>& values) {
  return {values.begin(), values.end()};
}

}  // namespace

TEST_CASE("gradients_3d") {
  SUBCASE("constant volume has zero gradients") {
    FrameVolume vol(5, 5, 5);
    for (double& v : vol.data) v = 0.3;
    const GradientVolume g = gradients_3d(vol);
    for (const double v : g.la) CHECK(v == 0.0);
    for (const double v : g.lb) CHECK(v == 0.0);
    for (const double v : g.lt) CHECK(v == 0.0);
  }
  SUBCASE("x ramp gives constant positive La and zero Lb, Lt") {
    const int n = 8;
    FrameVolume vol(n, n, n);
    for (int t = 0; t < n; ++t) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) vol.at(x, y, t) = static_cast<double>(x) / n;
      }
    }
    const GradientVolume g = gradients_3d(vol);
    for (int t = 0; t < n; ++t) {
      for (int y = 0; y < n; ++y) {
        for (int x = 1; x + 1 < n; ++x) {
          const std::size_t i = g.index(x, y, t);
          CHECK(g.la[i] == doctest::Approx(1.0 / n).epsilon(1e-12));
          CHECK(g.lb[i] == 0.0);
          CHECK(g.lt[i] == 0.0);
        }
      }
    }
  }
  SUBCASE("two frames are too few") {
    CHECK_THROWS_AS(gradients_3d(FrameVolume(8, 8, 2)), VolumeTooSmall);
  }
}

TEST_CASE("voxel_polar") {
  const PolarGradient a = voxel_polar(3.0, 4.0, 0.0);
  CHECK(a.magnitude == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(a.theta == doctest::Approx(std::atan2(4.0, 3.0)).epsilon(1e-15));
  CHECK(a.phi == 0.0);

  const PolarGradient b = voxel_polar(0.0, 0.0, 1.0);
  CHECK(b.magnitude == 1.0);
  CHECK(b.phi == doctest::Approx(kPi / 2).epsilon(1e-15));

  const PolarGradient zero = voxel_polar(0.0, 0.0, 0.0);
  CHECK(zero.magnitude == 0.0);
  CHECK(zero.theta == 0.0);
  CHECK(zero.phi == 0.0);
}

TEST_CASE("solid angle weights") {
  SUBCASE("equatorial bin") {
    const double w = solid_angle_weight(0.0, kPi / 10, kPi / 4);
    CHECK(w == doctest::Approx((kPi / 4) * std::sin(kPi / 10)).epsilon(1e-15));
    CHECK(w == doctest::Approx(0.2427).epsilon(1e-3));
  }
  SUBCASE("polar cap is smaller than the equatorial bin") {
    const double equator = solid_angle_weight(0.0, kPi / 10, kPi / 4);
    const double cap = solid_angle_weight(kPi / 2 - kPi / 10, kPi / 10, kPi / 4);
    CHECK(cap < equator);
    CHECK(cap > 0.0);
  }
  SUBCASE("the 8 x 10 grid partitions the sphere") {
    double total = 0.0;
    for (int it = 0; it < 8; ++it) {
      for (int ip = 0; ip < 10; ++ip) {
        total += solid_angle_weight(-kPi / 2 + ip * (kPi / 10), kPi / 10, 2 * kPi / 8);
      }
    }
    CHECK(std::abs(total - 4.0 * kPi) < 1e-9);
  }
  SUBCASE("degenerate bins are rejected") {
    CHECK_THROWS_AS(solid_angle_weight(0.0, 0.0, kPi / 4), DegenerateBin);
    CHECK_THROWS_AS(solid_angle_weight(kPi / 2, kPi / 10, kPi / 4), DegenerateBin);
  }
}

TEST_CASE("descriptor basics") {
  const DescriptorConfig cfg;

  SUBCASE("constant region has no contrast") {
    FrameVolume vol(16, 16, 16);
    for (double& v : vol.data) v = 0.5;
    const GradientVolume g = gradients_3d(vol);
    CHECK_THROWS_AS(compute_descriptor(vol, g, {8, 8, 8, 1.5, 1.0}, cfg), LowContrast);
  }

  SUBCASE("default config gives a 640-dim unit vector") {
    CHECK(cfg.dimension() == 640);
    const FrameVolume vol = random_volume(16, 31);
    const GradientVolume g = gradients_3d(vol);
    const Descriptor d = compute_descriptor(vol, g, {8, 8, 8, 1.5, 1.0}, cfg);
    REQUIRE(d.values.size() == 640);
    double norm2 = 0.0;
    for (const double v : d.values) {
      CHECK(v >= 0.0);
      norm2 += v * v;
    }
    CHECK(std::abs(std::sqrt(norm2) - 1.0) < 1e-9);
  }

  SUBCASE("support that does not fit is rejected") {
    const FrameVolume vol = random_volume(16, 32);
    const GradientVolume g = gradients_3d(vol);
    CHECK_THROWS_AS(compute_descriptor(vol, g, {0, 0, 0, 1.5, 1.0}, cfg), SupportOutOfBounds);
    CHECK_THROWS_AS(compute_descriptor(vol, g, {15, 8, 8, 1.5, 1.0}, cfg),
                    SupportOutOfBounds);
  }
}

TEST_CASE("doubling the contrast leaves the descriptor unchanged") {
  const DescriptorConfig cfg;
  const FrameVolume vol = random_volume(16, 33, 0.49);
  FrameVolume doubled = vol;
  for (double& v : doubled.data) v = std::min(1.0, 2.0 * v);  // never actually clips

  const Descriptor d1 =
      compute_descriptor(vol, gradients_3d(vol), {8, 8, 8, 1.5, 1.0}, cfg);
  const Descriptor d2 =
      compute_descriptor(doubled, gradients_3d(doubled), {8, 8, 8, 1.5, 1.0}, cfg);
  REQUIRE(d1.values.size() == d2.values.size());
  for (std::size_t i = 0; i < d1.values.size(); ++i) {
    CHECK(std::abs(d1.values[i] - d2.values[i]) < 1e-9);
  }
}

TEST_CASE("descriptor dimension follows the configuration") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    DescriptorConfig cfg;
    cfg.subregion_grid = 1 + static_cast<int>(rng.below(3));
    cfg.subregion_size = 2 + static_cast<int>(rng.below(3));
    cfg.theta_bins = 3 + static_cast<int>(rng.below(6));
    cfg.phi_bins = 2 + static_cast<int>(rng.below(9));
    const int side = cfg.support();
    const int n = std::max(16, 2 * side + 2);

    const FrameVolume vol = random_volume(n, 100 + trial);
    const GradientVolume g = gradients_3d(vol);
    const Descriptor d =
        compute_descriptor(vol, g, {n / 2, n / 2, n / 2, 1.5, 1.0}, cfg);
    CHECK(static_cast<int>(d.values.size()) ==
          cfg.subregion_grid * cfg.subregion_grid * cfg.subregion_grid * cfg.theta_bins *
              cfg.phi_bins);
  }
}

TEST_CASE("rotating the gradient field by one azimuth bin permutes theta cells") {
  // With 4 theta bins the shift is a quarter turn, (la, lb) -> (-lb, la),
  // which is exact in floating point; cell sums must match bitwise.
  DescriptorConfig cfg;
  cfg.theta_bins = 4;
  const int side = cfg.support();
  const int n = 2 * side;
  const InterestPoint p{n / 2, n / 2, n / 2, 1.5, 1.0};

  GradientVolume base = empty_gradients(n);
  GradientVolume rotated = empty_gradients(n);
  SplitMix64 rng(4242);
  const double delta_theta = 2.0 * kPi / cfg.theta_bins;
  for (std::size_t i = 0; i < base.la.size(); ++i) {
    const double magnitude = 0.1 + rng.uniform01();
    // keep angles away from bin edges so the rotated angle bins cleanly
    const int bin = static_cast<int>(rng.below(cfg.theta_bins));
    const double u = 0.05 + 0.9 * rng.uniform01();
    const double theta = -kPi + (bin + u) * delta_theta;
    const double phi = (rng.uniform01() - 0.5) * 0.98 * kPi;
    set_polar(base, i, magnitude, theta, phi);
    rotated.la[i] = -base.lb[i];
    rotated.lb[i] = base.la[i];
    rotated.lt[i] = base.lt[i];
  }

  const std::vector<double> h1 = raw_histogram(base, p, cfg);
  const std::vector<double> h2 = raw_histogram(rotated, p, cfg);
  REQUIRE(h1.size() == h2.size());

  CHECK(as_multiset(h1) == as_multiset(h2));
  for (std::size_t row = 0; row < h1.size() / cfg.theta_bins; ++row) {
    for (int it = 0; it < cfg.theta_bins; ++it) {
      const std::size_t from = row * cfg.theta_bins + it;
      const std::size_t to = row * cfg.theta_bins + ((it + 1) % cfg.theta_bins);
      CHECK(h2[to] == h1[from]);  // bitwise
    }
  }
}

TEST_CASE("voxel contributions carry unit weight at the keypoint and decay with distance") {
  DescriptorConfig cfg;
  const int n = 2 * cfg.support();
  const InterestPoint p{n / 2, n / 2, n / 2, 1.5, 1.0};
  const double delta_phi = kPi / cfg.phi_bins;
  const double delta_theta = 2.0 * kPi / cfg.theta_bins;

  auto single_voxel_sum = [&](int offset) {
    GradientVolume g = empty_gradients(n);
    set_polar(g, g.index(p.x + offset, p.y, p.t), 2.0, 0.3, 0.2);
    const std::vector<double> h = raw_histogram(g, p, cfg);
    double total = 0.0;
    for (const double v : h) total += v;
    return total;
  };

  // at the keypoint the Gaussian factor is exp(0) = 1, so the cell holds
  // magnitude / solid_angle exactly
  const PolarGradient polar = voxel_polar(2.0 * std::cos(0.2) * std::cos(0.3),
                                          2.0 * std::cos(0.2) * std::sin(0.3),
                                          2.0 * std::sin(0.2));
  const int ip = static_cast<int>(std::floor((polar.phi + kPi / 2) / delta_phi));
  const double solid = solid_angle_weight(-kPi / 2 + ip * delta_phi, delta_phi, delta_theta);
  CHECK(single_voxel_sum(0) == doctest::Approx(polar.magnitude / solid).epsilon(1e-12));

  double previous = single_voxel_sum(0);
  for (int offset = 1; offset <= 3; ++offset) {
    const double current = single_voxel_sum(offset);
    CHECK(current < previous);
    previous = current;
  }
}

TEST_CASE("raw histograms are non-negative for random fields") {
  DescriptorConfig cfg;
  const int n = 2 * cfg.support();
  GradientVolume g = empty_gradients(n);
  SplitMix64 rng(77);
  for (std::size_t i = 0; i < g.la.size(); ++i) {
    g.la[i] = rng.gaussian();
    g.lb[i] = rng.gaussian();
    g.lt[i] = rng.gaussian();
  }
  const auto h = raw_histogram(g, {n / 2, n / 2, n / 2, 1.5, 1.0}, cfg);
  for (const double v : h) CHECK(v >= 0.0);
}

TEST_CASE("describe_keypoints") {
  const DescriptorConfig cfg;
  const FrameVolume vol = random_volume(16, 55);

  SUBCASE("empty input, empty output") {
    CHECK(describe_keypoints(vol, {}, cfg).empty());
  }
  SUBCASE("an interior point is described, a border point is dropped") {
    const std::vector<InterestPoint> points = {{0, 0, 0, 1.5, 1.0}, {8, 8, 8, 1.5, 1.0}};
    const auto described = describe_keypoints(vol, points, cfg);
    REQUIRE(described.size() == 1);
    CHECK(described[0].first.x == 8);
    CHECK(described[0].second.values.size() == 640);
  }
  SUBCASE("order and content are thread-count independent") {
    std::vector<InterestPoint> points;
    for (int i = 4; i <= 11; ++i) points.push_back({i, 8, 8, 1.5, 1.0});
    const auto serial = describe_keypoints(vol, points, cfg, 1);
    const auto parallel = describe_keypoints(vol, points, cfg, 8);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].first.x == parallel[i].first.x);
      CHECK(serial[i].second.values == parallel[i].second.values);
    }
  }
}

TEST_CASE("descriptor container round-trips bitwise") {
  const DescriptorConfig cfg;
  const FrameVolume vol = random_volume(16, 56);
  const auto described =
      describe_keypoints(vol, {{8, 8, 8, 1.5, 1.0}, {9, 8, 8, 1.5, 1.0}}, cfg);
  REQUIRE(described.size() == 2);

  flyact::testing::TempDir dir("desc");
  write_descriptors(dir / "d.bin", described);
  const auto back = read_descriptors(dir / "d.bin", cfg.dimension());
  REQUIRE(back.size() == described.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].first.x == described[i].first.x);
    CHECK(back[i].first.y == described[i].first.y);
    CHECK(back[i].first.t == described[i].first.t);
    CHECK(back[i].second.values == described[i].second.values);
  }

  CHECK_THROWS_AS(read_descriptors(dir / "missing.bin", cfg.dimension()), DataError);
}
