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

#include <cstddef>
#include <span>
#include <vector>

namespace flyact {

/// A grayscale clip as a dense (width x height x num_frames) array of
/// luminance values in [0,1], indexed (x, y, t). Frames are stored
/// contiguously, row-major within a frame.
struct FrameVolume {
  int width = 0;
  int height = 0;
  int num_frames = 0;
  std::vector<double> data;

  FrameVolume() = default;
  FrameVolume(int w, int h, int frames)
      : width(w),
        height(h),
        num_frames(frames),
        data(static_cast<std::size_t>(w) * h * frames, 0.0) {}

  std::size_t index(int x, int y, int t) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  double at(int x, int y, int t) const { return data[index(x, y, t)]; }
  double& at(int x, int y, int t) { return data[index(x, y, t)]; }

  std::span<const double> frame(int t) const {
    return {data.data() + index(0, 0, t), static_cast<std::size_t>(width) * height};
  }
  std::span<double> frame(int t) {
    return {data.data() + index(0, 0, t), static_cast<std::size_t>(width) * height};
  }
};

/// Dense real-valued voxel grid with FrameVolume's layout but no [0,1]
/// constraint (gradients, energies, stacked response maps).
struct Volume {
  int width = 0;
  int height = 0;
  int num_frames = 0;
  std::vector<double> values;

  Volume() = default;
  Volume(int w, int h, int frames)
      : width(w),
        height(h),
        num_frames(frames),
        values(static_cast<std::size_t>(w) * h * frames, 0.0) {}

  std::size_t index(int x, int y, int t) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  double at(int x, int y, int t) const { return values[index(x, y, t)]; }
  double& at(int x, int y, int t) { return values[index(x, y, t)]; }
};

/// Dense 2-D grid of doubles, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  double at(int x, int y) const { return values[index(x, y)]; }
  double& at(int x, int y) { return values[index(x, y)]; }
};

/// One detected selective spatio-temporal interest point.
struct InterestPoint {
  int x = 0;
  int y = 0;
  int t = 0;
  double scale = 0.0;
  double response = 0.0;
};

}  // namespace flyact
