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
#include <vector>

#include "flyact/errors.hpp"
#include "flyact/types.hpp"

namespace flyact {

/// Selective spatio-temporal interest point detector parameters.
///
/// mask_inner_radius / mask_outer_radius < 0 means "derive from the spatial
/// scale" (c and 4c); call resolved() to materialize them.
struct DetectorConfig {
  double spatial_scale_c = 1.5;        // Gaussian derivative scale, px
  double kappa = 0.04;                 // Harris constant
  double suppression_strength_rho = 1.5;
  double mask_inner_radius = -1.0;     // annulus, px; < 0 -> spatial_scale_c
  double mask_outer_radius = -1.0;     // annulus, px; < 0 -> 4 * spatial_scale_c
  int temporal_scale_tau = 5;          // frames
  double temporal_threshold_frac = 0.1;
  int nms_block = 3;                   // odd voxel count
  double response_threshold_frac = 0.05;

  DetectorConfig resolved() const;
  void validate() const;  // throws DataError on an invalid combination
};

// Sampled 1-D Gaussian taps, radius ceil(3*sigma). Returned as the
// non-negative half [w0, w1, ..., wr]; the full kernel is symmetric and
// normalized so w0 + 2*sum(wi) = 1. Smoothing applies taps pairwise,
// w0*v[i] + sum wk*(v[i-k] + v[i+k]), so constants are preserved and
// derivatives of constants are exactly zero.
std::vector<double> gaussian_kernel(double sigma);

// Derivative-of-Gaussian taps [d1, ..., dr]; applied antisymmetrically as
// sum dk*(v[i+k] - v[i-k]) and normalized to unit response on a unit-slope
// ramp. Borders reflect (mirrored without repeating the edge sample).
std::vector<double> gaussian_deriv_kernel(double sigma);

using ResponseMap = Plane;
/// Gradient angle per pixel in (-pi, pi]; NaN where the gradient vanishes.
using OrientationMap = Plane;

/// Harris corner score det(M) - kappa*trace(M)^2 of the structure tensor M,
/// derivative scale c, integration scale 2c. Negative scores clamp to 0.
ResponseMap harris_response(const Plane& frame, double c, double kappa);

/// atan2(vertical derivative, horizontal derivative) at scale c.
OrientationMap orientation_map(const Plane& frame, double c);

/// Surround-suppression term: for each pixel, the sum of responses over the
/// annular mask, each weighted by max(0, cos(orientation difference)).
/// Offsets outside the image and pixels without orientation contribute 0.
ResponseMap suppression_term(const ResponseMap& s, const OrientationMap& o,
                             const DetectorConfig& cfg);

/// C = max(0, S - rho * t), pointwise.
ResponseMap apply_suppression(const ResponseMap& s, const ResponseMap& t, double rho);

/// Squared central temporal difference (I(t+1) - I(t-1))^2 / 4, Gaussian
/// smoothed along t with std = tau (reflected borders). Frames 0 and T-1,
/// where the difference stencil does not fit, carry energy 0.
Volume temporal_energy(const FrameVolume& vol, int tau);

/// Keeps voxels strictly greater than every other voxel in the centered
/// block^3 neighborhood (ties suppress both) and > 0. `scale` is copied
/// into the output points. Sorted by (t, y, x).
std::vector<InterestPoint> non_maxima_suppress(const Volume& c_volume, int block,
                                               double scale = 0.0);

/// Full detector: per frame, Harris corners (the local maxima of the
/// response map) are surround-suppressed against each other; the surviving
/// responses are gated by temporal energy relative to the global energy
/// maximum, thresholded relative to the global response maximum, and passed
/// through 3-D non-maxima suppression. Deterministic for any `threads`;
/// points are sorted by (t, y, x).
std::vector<InterestPoint> detect_sstip(const FrameVolume& vol, const DetectorConfig& cfg,
                                        int threads = 1);

/// Point list CSV, header `x,y,t,scale,response`, doubles at 17 significant
/// digits.
void write_points_csv(const std::filesystem::path& file,
                      const std::vector<InterestPoint>& points);
std::vector<InterestPoint> read_points_csv(const std::filesystem::path& file);

}  // namespace flyact
