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

#include "flyact/sift3d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>

#include "flyact/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary containers are little-endian; big-endian hosts are unsupported");

namespace flyact {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDescriptorClamp = 0.2;
constexpr double kContrastFloor = 1e-12;

int clamp_bin(double value, int bins) {
  const int b = static_cast<int>(std::floor(value));
  return std::clamp(b, 0, bins - 1);
}

void l2_normalize(std::vector<double>& v, double norm) {
  for (double& x : v) x /= norm;
}

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

DescriptorConfig DescriptorConfig::resolved() const {
  DescriptorConfig out = *this;
  if (out.gauss_sigma_w <= 0.0) out.gauss_sigma_w = support() / 2.0;
  return out;
}

void DescriptorConfig::validate() const {
  if (subregion_grid < 1 || subregion_size < 1 || theta_bins < 1 || phi_bins < 1) {
    throw DataError("descriptor config values must be >= 1");
  }
}

GradientVolume gradients_3d(const FrameVolume& vol) {
  if (vol.width < 3 || vol.height < 3 || vol.num_frames < 3) {
    throw VolumeTooSmall("gradients need at least 3 samples per axis, volume is " +
                         std::to_string(vol.width) + "x" + std::to_string(vol.height) + "x" +
                         std::to_string(vol.num_frames));
  }
  GradientVolume g;
  g.width = vol.width;
  g.height = vol.height;
  g.num_frames = vol.num_frames;
  const std::size_t total = vol.data.size();
  g.la.resize(total);
  g.lb.resize(total);
  g.lt.resize(total);

  auto central = [](double next, double prev) { return (next - prev) / 2.0; };
  for (int t = 0; t < vol.num_frames; ++t) {
    for (int y = 0; y < vol.height; ++y) {
      for (int x = 0; x < vol.width; ++x) {
        const std::size_t i = vol.index(x, y, t);
        if (x == 0) {
          g.la[i] = vol.at(1, y, t) - vol.at(0, y, t);
        } else if (x == vol.width - 1) {
          g.la[i] = vol.at(x, y, t) - vol.at(x - 1, y, t);
        } else {
          g.la[i] = central(vol.at(x + 1, y, t), vol.at(x - 1, y, t));
        }
        if (y == 0) {
          g.lb[i] = vol.at(x, 1, t) - vol.at(x, 0, t);
        } else if (y == vol.height - 1) {
          g.lb[i] = vol.at(x, y, t) - vol.at(x, y - 1, t);
        } else {
          g.lb[i] = central(vol.at(x, y + 1, t), vol.at(x, y - 1, t));
        }
        if (t == 0) {
          g.lt[i] = vol.at(x, y, 1) - vol.at(x, y, 0);
        } else if (t == vol.num_frames - 1) {
          g.lt[i] = vol.at(x, y, t) - vol.at(x, y, t - 1);
        } else {
          g.lt[i] = central(vol.at(x, y, t + 1), vol.at(x, y, t - 1));
        }
      }
    }
  }
  return g;
}

PolarGradient voxel_polar(double la, double lb, double lt) {
  PolarGradient p;
  if (la == 0.0 && lb == 0.0 && lt == 0.0) return p;  // zero-vector convention
  const double planar = std::sqrt(la * la + lb * lb);
  p.magnitude = std::sqrt(la * la + lb * lb + lt * lt);
  p.theta = (planar == 0.0) ? 0.0 : std::atan2(lb, la);
  p.phi = std::atan2(lt, planar);
  return p;
}

double solid_angle_weight(double phi_bin_low, double delta_phi, double delta_theta) {
  if (delta_phi <= 0.0 || delta_theta <= 0.0) {
    throw DegenerateBin("bin extents must be positive");
  }
  const double weight = delta_theta * (std::sin(phi_bin_low + delta_phi) - std::sin(phi_bin_low));
  if (!(weight > 0.0)) {
    throw DegenerateBin("zero-measure orientation bin at phi_low = " +
                        std::to_string(phi_bin_low));
  }
  return weight;
}

std::vector<double> raw_histogram(const GradientVolume& grads, const InterestPoint& p,
                                  const DescriptorConfig& cfg) {
  cfg.validate();
  const DescriptorConfig rc = cfg.resolved();
  const int side = rc.support();
  const int grid = rc.subregion_grid;
  const int x0 = p.x - side / 2;
  const int y0 = p.y - side / 2;
  const int t0 = p.t - side / 2;
  if (x0 < 0 || y0 < 0 || t0 < 0 || x0 + side > grads.width || y0 + side > grads.height ||
      t0 + side > grads.num_frames) {
    throw SupportOutOfBounds("descriptor support does not fit at (" + std::to_string(p.x) +
                             ", " + std::to_string(p.y) + ", " + std::to_string(p.t) + ")");
  }

  const double delta_theta = 2.0 * kPi / rc.theta_bins;
  const double delta_phi = kPi / rc.phi_bins;
  std::vector<double> inv_solid(rc.phi_bins);
  for (int ip = 0; ip < rc.phi_bins; ++ip) {
    const double phi_low = -kPi / 2.0 + ip * delta_phi;
    inv_solid[ip] = 1.0 / solid_angle_weight(phi_low, delta_phi, delta_theta);
  }

  const double inv_two_sigma2 = 1.0 / (2.0 * rc.gauss_sigma_w * rc.gauss_sigma_w);
  std::vector<double> hist(static_cast<std::size_t>(rc.dimension()), 0.0);

  for (int t = t0; t < t0 + side; ++t) {
    for (int y = y0; y < y0 + side; ++y) {
      for (int x = x0; x < x0 + side; ++x) {
        const std::size_t i = grads.index(x, y, t);
        const PolarGradient polar = voxel_polar(grads.la[i], grads.lb[i], grads.lt[i]);
        if (polar.magnitude == 0.0) continue;

        const int it = clamp_bin((polar.theta + kPi) / delta_theta, rc.theta_bins);
        const int ip = clamp_bin((polar.phi + kPi / 2.0) / delta_phi, rc.phi_bins);
        const int sx = (x - x0) / rc.subregion_size;
        const int sy = (y - y0) / rc.subregion_size;
        const int sz = (t - t0) / rc.subregion_size;

        const double dx = p.x - x;
        const double dy = p.y - y;
        const double dt = p.t - t;
        const double gauss = std::exp(-(dx * dx + dy * dy + dt * dt) * inv_two_sigma2);

        const std::size_t cell =
            ((((static_cast<std::size_t>(sz) * grid + sy) * grid + sx) * rc.phi_bins + ip) *
             rc.theta_bins) +
            it;
        hist[cell] += inv_solid[ip] * polar.magnitude * gauss;
      }
    }
  }
  return hist;
}

Descriptor compute_descriptor(const FrameVolume& vol, const GradientVolume& grads,
                              const InterestPoint& p, const DescriptorConfig& cfg) {
  if (vol.width != grads.width || vol.height != grads.height ||
      vol.num_frames != grads.num_frames) {
    throw DimensionMismatch("gradient volume does not match the frame volume");
  }
  Descriptor d;
  d.values = raw_histogram(grads, p, cfg);

  const double norm = l2_norm(d.values);
  if (norm < kContrastFloor) {
    throw LowContrast("no gradient energy around (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ", " + std::to_string(p.t) + ")");
  }
  l2_normalize(d.values, norm);
  for (double& v : d.values) v = std::min(v, kDescriptorClamp);
  l2_normalize(d.values, l2_norm(d.values));
  return d;
}

std::vector<std::pair<InterestPoint, Descriptor>> describe_keypoints(
    const FrameVolume& vol, const std::vector<InterestPoint>& points,
    const DescriptorConfig& cfg, int threads) {
  const GradientVolume grads = gradients_3d(vol);

  std::vector<std::optional<Descriptor>> slots(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    try {
      slots[i] = compute_descriptor(vol, grads, points[i], cfg);
    } catch (const SupportOutOfBounds&) {
    } catch (const LowContrast&) {
    }
  });

  std::vector<std::pair<InterestPoint, Descriptor>> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (slots[i]) out.emplace_back(points[i], std::move(*slots[i]));
  }
  return out;
}

void write_descriptors(const std::filesystem::path& file,
                       const std::vector<std::pair<InterestPoint, Descriptor>>& items) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  const std::uint64_t count = items.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [point, descriptor] : items) {
    const std::uint32_t coords[3] = {static_cast<std::uint32_t>(point.x),
                                     static_cast<std::uint32_t>(point.y),
                                     static_cast<std::uint32_t>(point.t)};
    out.write(reinterpret_cast<const char*>(coords), sizeof(coords));
    out.write(reinterpret_cast<const char*>(descriptor.values.data()),
              static_cast<std::streamsize>(descriptor.values.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write to " + file.string());
}

std::vector<std::pair<InterestPoint, Descriptor>> read_descriptors(
    const std::filesystem::path& file, int dimension) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in) throw CorruptFile(file.string() + ": missing descriptor count");

  std::vector<std::pair<InterestPoint, Descriptor>> items;
  items.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t coords[3];
    in.read(reinterpret_cast<char*>(coords), sizeof(coords));
    Descriptor d;
    d.values.resize(static_cast<std::size_t>(dimension));
    in.read(reinterpret_cast<char*>(d.values.data()),
            static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!in) throw CorruptFile(file.string() + ": truncated descriptor record");
    InterestPoint p;
    p.x = static_cast<int>(coords[0]);
    p.y = static_cast<int>(coords[1]);
    p.t = static_cast<int>(coords[2]);
    items.emplace_back(p, std::move(d));
  }
  char extra;
  if (in.read(&extra, 1)) throw CorruptFile(file.string() + ": trailing bytes");
  return items;
}

}  // namespace flyact
