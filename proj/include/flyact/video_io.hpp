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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "flyact/errors.hpp"
#include "flyact/types.hpp"

namespace flyact {

/// One annotated clip: a temporal range [start_frame, end_frame] (inclusive)
/// inside a frame sequence.
struct ClipAnnotation {
  std::string clip_id;
  std::string label;
  int start_frame = 0;
  int end_frame = 0;
};

struct ManifestEntry {
  std::string frames_path;
  ClipAnnotation annotation;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

struct SplitSpec {
  int train_per_class = 35;
  std::uint64_t seed = 0;
};

/// Loads every `*.pgm` file in `dir` (binary P5, maxval 255), in
/// lexicographic filename order, as one volume with luminance = byte / 255.
FrameVolume load_frames(const std::filesystem::path& dir);

/// Writes the volume as frame_00000.pgm, frame_00001.pgm, ... with
/// byte = round(luminance * 255). Creates `dir` if needed.
void write_frames(const FrameVolume& vol, const std::filesystem::path& dir);

/// Returns the sub-volume of frames [start_frame, end_frame], inclusive.
FrameVolume extract_clip(const FrameVolume& vol, const ClipAnnotation& ann);

/// Parses the manifest CSV: header `clip_id,frames_path,label,start_frame,
/// end_frame`, comma-separated, no quoting. Paths are resolved by callers,
/// relative paths relative to the manifest's directory is their convention.
DatasetManifest parse_manifest(const std::filesystem::path& file);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);

/// Splits per class: exactly `train_per_class` entries of each class go to
/// train, the rest to test. Selection is a Fisher-Yates shuffle per class
/// (classes processed in sorted name order) over one SplitMix64 stream
/// seeded by `spec.seed`; both outputs preserve the manifest's entry order.
std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          const SplitSpec& spec);

enum class SyntheticPattern { kOrbitingBlob, kOscillatingBlob, kStaticScene };

SyntheticPattern parse_pattern(const std::string& name);
std::string pattern_name(SyntheticPattern pattern);

/// Exact blob center used to render frame t.
struct MotionCenter {
  double x = 0.0;
  double y = 0.0;
  int t = 0;
};

struct SyntheticClip {
  FrameVolume volume;
  std::vector<MotionCenter> ground_truth;  // one entry per frame
};

// Synthetic scene geometry. With cx = width / 2, cy = height / 2 and
// R = min(width, height) / 4, the blob center at frame t is
//   orbiting:    (cx + R cos(2 pi t / P), cy + R sin(2 pi t / P))
//   oscillating: (cx + R sin(2 pi t / P), cy)
//   static:      (cx, cy)
// with period P = kSynthPeriodFrames. The blob is a Gaussian of sigma
// kSynthBlobSigma and amplitude kSynthAmplitude over a kSynthBackground
// background, clipped to [0,1] after additive Gaussian pixel noise.
constexpr double kSynthBackground = 0.1;
constexpr double kSynthAmplitude = 0.8;
constexpr double kSynthBlobSigma = 2.0;
constexpr int kSynthPeriodFrames = 24;

/// Renders a ground-truth test clip. Requires width, height >= 32 and
/// num_frames >= 11 (two default temporal scales plus one).
SyntheticClip generate_synthetic(SyntheticPattern pattern, int width, int height,
                                 int num_frames, double noise_sigma, std::uint64_t seed);

}  // namespace flyact
