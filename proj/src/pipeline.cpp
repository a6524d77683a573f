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

#include "flyact/pipeline.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include "flyact/format.hpp"
#include "flyact/parallel.hpp"

namespace flyact {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty()) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void PipelineConfig::validate() const {
  detector.validate();
  descriptor.validate();
  if (kernel.gamma < 0.0) throw ConfigError("kernel.gamma must be >= 0 (0 = median heuristic)");
  if (kernel.regularization_delta <= 0.0) {
    throw ConfigError("kernel.regularization_delta must be > 0");
  }
  if (split.train_per_class < 1) throw ConfigError("split.train_per_class must be >= 1");
}

void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "detector.spatial_scale_c") {
    cfg.detector.spatial_scale_c = parse_double(key, value);
  } else if (key == "detector.kappa") {
    cfg.detector.kappa = parse_double(key, value);
  } else if (key == "detector.suppression_strength_rho") {
    cfg.detector.suppression_strength_rho = parse_double(key, value);
  } else if (key == "detector.mask_inner_radius") {
    cfg.detector.mask_inner_radius = parse_double(key, value);
  } else if (key == "detector.mask_outer_radius") {
    cfg.detector.mask_outer_radius = parse_double(key, value);
  } else if (key == "detector.temporal_scale_tau") {
    cfg.detector.temporal_scale_tau = static_cast<int>(parse_int(key, value));
  } else if (key == "detector.temporal_threshold_frac") {
    cfg.detector.temporal_threshold_frac = parse_double(key, value);
  } else if (key == "detector.nms_block") {
    cfg.detector.nms_block = static_cast<int>(parse_int(key, value));
  } else if (key == "detector.response_threshold_frac") {
    cfg.detector.response_threshold_frac = parse_double(key, value);
  } else if (key == "descriptor.subregion_grid") {
    cfg.descriptor.subregion_grid = static_cast<int>(parse_int(key, value));
  } else if (key == "descriptor.subregion_size") {
    cfg.descriptor.subregion_size = static_cast<int>(parse_int(key, value));
  } else if (key == "descriptor.theta_bins") {
    cfg.descriptor.theta_bins = static_cast<int>(parse_int(key, value));
  } else if (key == "descriptor.phi_bins") {
    cfg.descriptor.phi_bins = static_cast<int>(parse_int(key, value));
  } else if (key == "descriptor.gauss_sigma_w") {
    cfg.descriptor.gauss_sigma_w = parse_double(key, value);
  } else if (key == "kernel.kind") {
    cfg.kernel.kind = parse_kernel_kind(value);
  } else if (key == "kernel.gamma") {
    cfg.kernel.gamma = parse_double(key, value);
  } else if (key == "kernel.regularization_delta") {
    cfg.kernel.regularization_delta = parse_double(key, value);
  } else if (key == "split.train_per_class") {
    cfg.split.train_per_class = static_cast<int>(parse_int(key, value));
  } else if (key == "split.seed") {
    cfg.split.seed = parse_uint64(key, value);
  } else if (key == "pooling") {
    if (value != "mean") throw ConfigError("pooling is fixed to 'mean'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void load_config_file(PipelineConfig& cfg, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open config " + file.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'section.key = value'", line_no);
    }
    apply_config_value(cfg, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

void apply_config_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    apply_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }
}

std::vector<std::pair<std::string, std::string>> config_items(const PipelineConfig& cfg) {
  const DetectorConfig det = cfg.detector.resolved();
  const DescriptorConfig desc = cfg.descriptor.resolved();
  std::vector<std::pair<std::string, std::string>> items;
  items.emplace_back("detector.spatial_scale_c", format_double(det.spatial_scale_c));
  items.emplace_back("detector.kappa", format_double(det.kappa));
  items.emplace_back("detector.suppression_strength_rho",
                     format_double(det.suppression_strength_rho));
  items.emplace_back("detector.mask_inner_radius", format_double(det.mask_inner_radius));
  items.emplace_back("detector.mask_outer_radius", format_double(det.mask_outer_radius));
  items.emplace_back("detector.temporal_scale_tau", std::to_string(det.temporal_scale_tau));
  items.emplace_back("detector.temporal_threshold_frac",
                     format_double(det.temporal_threshold_frac));
  items.emplace_back("detector.nms_block", std::to_string(det.nms_block));
  items.emplace_back("detector.response_threshold_frac",
                     format_double(det.response_threshold_frac));
  items.emplace_back("descriptor.subregion_grid", std::to_string(desc.subregion_grid));
  items.emplace_back("descriptor.subregion_size", std::to_string(desc.subregion_size));
  items.emplace_back("descriptor.theta_bins", std::to_string(desc.theta_bins));
  items.emplace_back("descriptor.phi_bins", std::to_string(desc.phi_bins));
  items.emplace_back("descriptor.gauss_sigma_w", format_double(desc.gauss_sigma_w));
  items.emplace_back("kernel.kind", kernel_kind_name(cfg.kernel.kind));
  items.emplace_back("kernel.gamma", format_double(cfg.kernel.gamma));
  items.emplace_back("kernel.regularization_delta",
                     format_double(cfg.kernel.regularization_delta));
  items.emplace_back("split.train_per_class", std::to_string(cfg.split.train_per_class));
  items.emplace_back("split.seed", std::to_string(cfg.split.seed));
  items.emplace_back("pooling", "mean");
  return items;
}

std::string render_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : config_items(cfg)) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, value] : config_items(PipelineConfig{})) keys.push_back(key);
  return keys;
}

Signature clip_signature(const FrameVolume& clip, const PipelineConfig& cfg,
                         std::string clip_id, int threads) {
  const auto points = detect_sstip(clip, cfg.detector, threads);
  const auto described = describe_keypoints(clip, points, cfg.descriptor, threads);
  return pool_signature(described, std::move(clip_id));
}

std::vector<FeaturizedClip> featurize_manifest(const DatasetManifest& manifest,
                                               const std::filesystem::path& base_dir,
                                               const PipelineConfig& cfg, int threads) {
  std::vector<FeaturizedClip> out(manifest.entries.size());
  parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    std::filesystem::path frames(entry.frames_path);
    if (frames.is_relative()) frames = base_dir / frames;

    out[i].clip_id = entry.annotation.clip_id;
    out[i].label = entry.annotation.label;
    const FrameVolume clip = extract_clip(load_frames(frames), entry.annotation);
    try {
      out[i].signature = clip_signature(clip, cfg, entry.annotation.clip_id, /*threads=*/1);
    } catch (const NoFeatures&) {
      // recorded as a failed clip; the evaluator charges it to its class
    }
  });
  return out;
}

SignatureSet collect_signatures(const std::vector<FeaturizedClip>& clips) {
  SignatureSet set;
  if (clips.empty()) return set;
  Eigen::Index dim = -1;
  for (const auto& clip : clips) {
    if (!clip.signature) {
      throw NoFeatures("clip '" + clip.clip_id + "' produced no features");
    }
    if (dim < 0) {
      dim = static_cast<Eigen::Index>(clip.signature->values.size());
      set.matrix.resize(static_cast<Eigen::Index>(clips.size()), dim);
    }
    if (static_cast<Eigen::Index>(clip.signature->values.size()) != dim) {
      throw DimensionMismatch("signature lengths differ between clips");
    }
    for (Eigen::Index d = 0; d < dim; ++d) {
      set.matrix(static_cast<Eigen::Index>(set.clip_ids.size()), d) =
          clip.signature->values[static_cast<std::size_t>(d)];
    }
    set.clip_ids.push_back(clip.clip_id);
    set.labels.push_back(clip.label);
  }
  return set;
}

}  // namespace flyact
