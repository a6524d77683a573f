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

#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "flyact/errors.hpp"
#include "flyact/types.hpp"

namespace flyact {

/// Per-voxel finite-difference gradients along x, y, t.
struct GradientVolume {
  int width = 0;
  int height = 0;
  int num_frames = 0;
  std::vector<double> la;  // d/dx
  std::vector<double> lb;  // d/dy
  std::vector<double> lt;  // d/dt

  std::size_t index(int x, int y, int t) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
};

/// 3D-SIFT descriptor layout. Defaults give 2x2x2 subregions of 4^3 voxels
/// (8x8x8 support) and 8 azimuth x 10 elevation bins: 8 * 80 = 640 values.
struct DescriptorConfig {
  int subregion_grid = 2;      // subregions per axis
  int subregion_size = 4;      // voxels per subregion axis
  int theta_bins = 8;          // azimuth bins over (-pi, pi]
  int phi_bins = 10;           // elevation bins over [-pi/2, pi/2]
  double gauss_sigma_w = -1.0; // < 0 -> half the support width

  int support() const { return subregion_grid * subregion_size; }
  int dimension() const {
    return subregion_grid * subregion_grid * subregion_grid * theta_bins * phi_bins;
  }
  DescriptorConfig resolved() const;
  void validate() const;
};

struct Descriptor {
  std::vector<double> values;
};

struct PolarGradient {
  double magnitude = 0.0;
  double theta = 0.0;  // azimuth, (-pi, pi]
  double phi = 0.0;    // elevation, [-pi/2, pi/2]
};

/// Central differences in the interior, one-sided on the boundary planes.
/// Requires width, height >= 3 and num_frames >= 3.
GradientVolume gradients_3d(const FrameVolume& vol);

/// Magnitude and spherical angles of one gradient vector. The zero vector
/// maps to (0, 0, 0).
PolarGradient voxel_polar(double la, double lb, double lt);

/// Solid angle of the bin [phi_low, phi_low + delta_phi] x delta_theta on
/// the unit sphere: delta_theta * (sin(phi_low + delta_phi) - sin(phi_low)).
/// The weights of a full theta x phi grid partition 4*pi.
double solid_angle_weight(double phi_bin_low, double delta_phi, double delta_theta);

/// Unnormalized orientation histogram of the support cube around `p`:
/// each voxel adds magnitude / solid_angle * exp(-dist^2 / (2 sigma_w^2))
/// to the (subregion, phi bin, theta bin) cell containing it. Cells are
/// concatenated in (z-subregion, y-subregion, x-subregion, phi, theta)
/// order, theta fastest. Throws SupportOutOfBounds if the cube does not fit.
std::vector<double> raw_histogram(const GradientVolume& grads, const InterestPoint& p,
                                  const DescriptorConfig& cfg);

/// raw_histogram, L2-normalized, entries clamped at 0.2, renormalized.
/// Throws LowContrast when the pre-normalization norm is below 1e-12.
Descriptor compute_descriptor(const FrameVolume& vol, const GradientVolume& grads,
                              const InterestPoint& p, const DescriptorConfig& cfg);

/// Computes gradients once and describes every point, silently dropping
/// points whose support does not fit or that have no contrast. Survivor
/// order matches input order for any `threads`.
std::vector<std::pair<InterestPoint, Descriptor>> describe_keypoints(
    const FrameVolume& vol, const std::vector<InterestPoint>& points,
    const DescriptorConfig& cfg, int threads = 1);

// Descriptor container: u64 LE record count, then per record x, y, t as
// u32 LE and the descriptor values as f64 LE.
void write_descriptors(const std::filesystem::path& file,
                       const std::vector<std::pair<InterestPoint, Descriptor>>& items);
std::vector<std::pair<InterestPoint, Descriptor>> read_descriptors(
    const std::filesystem::path& file, int dimension = 640);

}  // namespace flyact
