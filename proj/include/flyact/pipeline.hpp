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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flyact/signature.hpp"
#include "flyact/sift3d.hpp"
#include "flyact/srkda.hpp"
#include "flyact/stip.hpp"
#include "flyact/video_io.hpp"

namespace flyact {

/// Every tunable of the pipeline. Defaults are the operating point used
/// throughout: rho 1.5, tau 5, NMS block 3, 640-dim descriptors, rbf kernel
/// with median-heuristic gamma, 35 training clips per class. Pooling is
/// fixed to the descriptor mean.
struct PipelineConfig {
  DetectorConfig detector;
  DescriptorConfig descriptor;
  KernelConfig kernel;
  SplitSpec split;

  void validate() const;
};

// Flat text config: one `section.key = value` per line, `#` comments.
// Derived defaults (mask radii, descriptor sigma) follow their parents
// unless a line sets them explicitly.

/// Applies one key/value pair; throws ConfigError on unknown keys or
/// unparseable values. Keys listed by config_keys().
void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

void load_config_file(PipelineConfig& cfg, const std::filesystem::path& file);

/// `key=value` assignments from --set flags.
void apply_config_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments);

/// Effective configuration in a fixed key order, doubles at 17 significant
/// digits; parsing the result back reproduces the config exactly.
std::vector<std::pair<std::string, std::string>> config_items(const PipelineConfig& cfg);
std::string render_config(const PipelineConfig& cfg);
std::vector<std::string> config_keys();

/// detect + describe + pool for one clip. Throws NoFeatures when no
/// keypoint yields a descriptor.
Signature clip_signature(const FrameVolume& clip, const PipelineConfig& cfg,
                         std::string clip_id, int threads = 1);

struct FeaturizedClip {
  std::string clip_id;
  std::string label;
  std::optional<Signature> signature;  // empty = clip produced no features
};

/// Featurizes every manifest entry (frames loaded per entry, temporal range
/// applied). Clip order matches the manifest; NoFeatures failures are
/// recorded, not thrown. Frame paths resolve relative to `base_dir`.
std::vector<FeaturizedClip> featurize_manifest(const DatasetManifest& manifest,
                                               const std::filesystem::path& base_dir,
                                               const PipelineConfig& cfg, int threads = 1);

/// Stacks the successful clips into a SignatureSet, erroring on failures.
SignatureSet collect_signatures(const std::vector<FeaturizedClip>& clips);

}  // namespace flyact
