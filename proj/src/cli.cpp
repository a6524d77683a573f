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

#include "flyact/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "flyact/classify.hpp"
#include "flyact/format.hpp"
#include "flyact/model_io.hpp"
#include "flyact/pipeline.hpp"

namespace flyact {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  int threads = 1;
};

PipelineConfig resolve_config(const CommonOptions& common) {
  PipelineConfig cfg;
  if (!common.config_file.empty()) load_config_file(cfg, common.config_file);
  apply_config_overrides(cfg, common.overrides);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& common, bool with_config = true) {
  if (with_config) {
    cmd->add_option("--config", common.config_file, "flat key-value config file");
    cmd->add_option("--set", common.overrides, "override one config key (key=value)")
        ->take_all();
  }
  cmd->add_option("--threads", common.threads, "worker cap; any value gives identical output");
}

Eigen::VectorXd to_vector(const Signature& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = s.values[static_cast<std::size_t>(i)];
  return v;
}

std::vector<EvalItem> to_eval_items(const std::vector<FeaturizedClip>& clips) {
  std::vector<EvalItem> items;
  items.reserve(clips.size());
  for (const auto& clip : clips) {
    EvalItem item;
    item.clip_id = clip.clip_id;
    item.true_label = clip.label;
    if (clip.signature) item.signature = to_vector(*clip.signature);
    items.push_back(std::move(item));
  }
  return items;
}

std::string manifest_relative_path(const fs::path& clip_dir, const fs::path& manifest) {
  std::error_code ec;
  const fs::path rel = fs::relative(clip_dir, manifest.parent_path(), ec);
  return (ec || rel.empty()) ? fs::absolute(clip_dir).string() : rel.string();
}

void cmd_synth(const std::string& pattern_text, const std::string& out_dir,
               const std::string& label_arg, const std::string& manifest_path, int count,
               int width, int height, int frames, double noise_sigma, std::uint64_t seed) {
  const SyntheticPattern pattern = parse_pattern(pattern_text);
  const std::string label = label_arg.empty() ? pattern_name(pattern) : label_arg;

  DatasetManifest manifest;
  const bool append = !manifest_path.empty() && fs::exists(manifest_path);
  if (append) manifest = parse_manifest(manifest_path);

  for (int i = 0; i < count; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03d", i);
    const std::string clip_id = label + suffix;
    const fs::path clip_dir = fs::path(out_dir) / clip_id;

    const SyntheticClip clip =
        generate_synthetic(pattern, width, height, frames, noise_sigma, seed + i);
    write_frames(clip.volume, clip_dir);

    std::ofstream truth(clip_dir / "ground_truth.csv");
    truth << "t,x,y\n";
    for (const auto& center : clip.ground_truth) {
      truth << center.t << ',' << format_double(center.x) << ',' << format_double(center.y)
            << '\n';
    }

    if (!manifest_path.empty()) {
      ManifestEntry entry;
      entry.frames_path = manifest_relative_path(clip_dir, manifest_path);
      entry.annotation = {clip_id, label, 0, frames - 1};
      manifest.entries.push_back(std::move(entry));
    }
  }
  if (!manifest_path.empty()) write_manifest(manifest, manifest_path);
  std::cout << "synth: wrote " << count << " " << pattern_name(pattern) << " clip(s) under "
            << out_dir << "\n";
}

void cmd_detect(const CommonOptions& common, const std::string& frames_dir,
                const std::string& out_file) {
  const PipelineConfig cfg = resolve_config(common);
  const FrameVolume vol = load_frames(frames_dir);
  const auto points = detect_sstip(vol, cfg.detector, common.threads);
  write_points_csv(out_file, points);
  std::cout << "detect: " << points.size() << " points -> " << out_file << "\n";
}

void cmd_describe(const CommonOptions& common, const std::string& frames_dir,
                  const std::string& points_file, const std::string& out_file) {
  const PipelineConfig cfg = resolve_config(common);
  const FrameVolume vol = load_frames(frames_dir);
  const auto points = read_points_csv(points_file);
  const auto described = describe_keypoints(vol, points, cfg.descriptor, common.threads);
  write_descriptors(out_file, described);
  std::cout << "describe: " << described.size() << "/" << points.size() << " descriptors -> "
            << out_file << "\n";
}

void cmd_featurize(const CommonOptions& common, const std::string& frames_dir,
                   const std::string& manifest_file, const std::string& descriptors_file,
                   const std::string& clip_id_arg, const std::string& label,
                   const std::string& out_file, const std::string& sidecar_file) {
  const PipelineConfig cfg = resolve_config(common);
  const int sources = (!frames_dir.empty()) + (!manifest_file.empty()) +
                      (!descriptors_file.empty());
  if (sources != 1) {
    throw ConfigError("featurize needs exactly one of --frames, --manifest, --descriptors");
  }

  SignatureSet set;
  if (!manifest_file.empty()) {
    const DatasetManifest manifest = parse_manifest(manifest_file);
    const auto clips = featurize_manifest(manifest, fs::path(manifest_file).parent_path(), cfg,
                                          common.threads);
    set = collect_signatures(clips);
  } else {
    Signature sig;
    if (!descriptors_file.empty()) {
      if (clip_id_arg.empty()) throw ConfigError("--descriptors requires --clip-id");
      const auto described = read_descriptors(descriptors_file, cfg.descriptor.dimension());
      sig = pool_signature(described, clip_id_arg);
    } else {
      const std::string clip_id =
          clip_id_arg.empty() ? fs::path(frames_dir).filename().string() : clip_id_arg;
      sig = clip_signature(load_frames(frames_dir), cfg, clip_id, common.threads);
    }
    set.matrix.resize(1, static_cast<Eigen::Index>(sig.values.size()));
    for (std::size_t i = 0; i < sig.values.size(); ++i) {
      set.matrix(0, static_cast<Eigen::Index>(i)) = sig.values[i];
    }
    set.clip_ids.push_back(sig.clip_id);
    set.labels.push_back(label);
  }

  write_signature_set(set, out_file, sidecar_file);
  std::cout << "featurize: " << set.matrix.rows() << " signature(s) of dim "
            << set.matrix.cols() << " -> " << out_file << "\n";
}

void cmd_train(const CommonOptions& common, const std::string& manifest_file,
               const std::string& features_file, const std::string& sidecar_file,
               const std::string& model_file) {
  const PipelineConfig cfg = resolve_config(common);

  SignatureSet set;
  if (!features_file.empty()) {
    if (sidecar_file.empty()) throw ConfigError("--features requires --sidecar");
    set = read_signature_set(features_file, sidecar_file);
  } else if (!manifest_file.empty()) {
    const DatasetManifest manifest = parse_manifest(manifest_file);
    const auto clips = featurize_manifest(manifest, fs::path(manifest_file).parent_path(), cfg,
                                          common.threads);
    set = collect_signatures(clips);
  } else {
    throw ConfigError("train needs --manifest or --features/--sidecar");
  }

  const TrainResult result = train_model(set.matrix, set.labels, cfg.kernel, cfg);
  for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
  save_model(result.model, model_file);
  std::cout << "train: " << result.model.class_names.size() << " classes, "
            << set.matrix.rows() << " clips -> " << model_file << "\n";
}

void cmd_predict(const CommonOptions& common, const std::string& model_file,
                 const std::string& frames_dir, int start_frame, int end_frame) {
  const TrainedModel model = load_model(model_file);
  FrameVolume vol = load_frames(frames_dir);
  if (end_frame >= 0) {
    vol = extract_clip(vol, {"cli", "", start_frame, end_frame});
  }
  const Signature sig = clip_signature(vol, model.pipeline_config,
                                       fs::path(frames_dir).filename().string(),
                                       common.threads);
  const Prediction p = predict(model, to_vector(sig));
  std::cout << p.label;
  for (Eigen::Index k = 0; k < p.distances.size(); ++k) {
    std::cout << ' ' << model.class_names[static_cast<std::size_t>(k)] << '='
              << format_double(p.distances(k));
  }
  std::cout << "\n";
}

void cmd_evaluate(const CommonOptions& common, const std::string& model_file,
                  const std::string& manifest_file, const std::string& report_file,
                  const std::string& log_file) {
  const TrainedModel model = load_model(model_file);
  const DatasetManifest manifest = parse_manifest(manifest_file);

  // the model's own config snapshot drives featurization, for reproducibility
  const auto clips = featurize_manifest(manifest, fs::path(manifest_file).parent_path(),
                                        model.pipeline_config, common.threads);
  const EvalReport report = evaluate(model, to_eval_items(clips));

  std::ofstream out(report_file);
  if (!out) throw DataError("cannot write " + report_file);
  out << render_report(report, model.pipeline_config);
  if (!log_file.empty()) write_clip_log(report.log, log_file);
  std::cout << "evaluate: accuracy=" << format_double(report.accuracy()) << " over "
            << report.matrix.total() << " clips -> " << report_file << "\n";
}

int default_threads_from_env() {
  const char* env = std::getenv("FLYACT_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v >= 1 ? v : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Drosophila social-action classification pipeline"};
  app.set_version_flag("--version", "flyact 1.0.0");
  app.require_subcommand(1);

  CommonOptions common;
  common.threads = default_threads_from_env();

  // synth
  std::string synth_pattern, synth_out, synth_label, synth_manifest;
  int synth_count = 1, synth_width = 64, synth_height = 64, synth_frames = 48;
  double synth_noise = 0.02;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "render ground-truth synthetic clips");
  synth->add_option("--pattern", synth_pattern,
                    "orbiting_blob | oscillating_blob | static_scene")->required();
  synth->add_option("--out", synth_out, "directory for clip subdirectories")->required();
  synth->add_option("--label", synth_label, "manifest label (default: pattern name)");
  synth->add_option("--manifest", synth_manifest, "manifest CSV to create or append to");
  synth->add_option("--count", synth_count, "number of clips (seeds seed, seed+1, ...)");
  synth->add_option("--width", synth_width, "frame width (>= 32)");
  synth->add_option("--height", synth_height, "frame height (>= 32)");
  synth->add_option("--frames", synth_frames, "frames per clip (>= 11)");
  synth->add_option("--noise-sigma", synth_noise, "Gaussian pixel noise sigma");
  synth->add_option("--seed", synth_seed, "base RNG seed");
  synth->callback([&] {
    cmd_synth(synth_pattern, synth_out, synth_label, synth_manifest, synth_count, synth_width,
              synth_height, synth_frames, synth_noise, synth_seed);
  });

  // detect
  std::string detect_frames, detect_out;
  auto* detect = app.add_subcommand("detect", "detect interest points in a frame directory");
  detect->add_option("--frames", detect_frames, "directory of PGM frames")->required();
  detect->add_option("--out", detect_out, "output point CSV")->required();
  add_common(detect, common);
  detect->callback([&] { cmd_detect(common, detect_frames, detect_out); });

  // describe
  std::string describe_frames, describe_points, describe_out;
  auto* describe = app.add_subcommand("describe", "compute descriptors at given points");
  describe->add_option("--frames", describe_frames, "directory of PGM frames")->required();
  describe->add_option("--points", describe_points, "point CSV from detect")->required();
  describe->add_option("--out", describe_out, "output descriptor container")->required();
  add_common(describe, common);
  describe->callback(
      [&] { cmd_describe(common, describe_frames, describe_points, describe_out); });

  // featurize
  std::string feat_frames, feat_manifest, feat_descriptors, feat_clip_id, feat_label;
  std::string feat_out, feat_sidecar;
  auto* featurize =
      app.add_subcommand("featurize", "pool clips into fixed-length signatures");
  featurize->add_option("--frames", feat_frames, "single clip: directory of PGM frames");
  featurize->add_option("--manifest", feat_manifest, "dataset manifest CSV");
  featurize->add_option("--descriptors", feat_descriptors,
                        "pool a precomputed descriptor container");
  featurize->add_option("--clip-id", feat_clip_id, "clip id for single-clip inputs");
  featurize->add_option("--label", feat_label, "label for single-clip inputs");
  featurize->add_option("--out", feat_out, "output signature matrix")->required();
  featurize->add_option("--sidecar", feat_sidecar, "output sidecar CSV")->required();
  add_common(featurize, common);
  featurize->callback([&] {
    cmd_featurize(common, feat_frames, feat_manifest, feat_descriptors, feat_clip_id,
                  feat_label, feat_out, feat_sidecar);
  });

  // train
  std::string train_manifest, train_features, train_sidecar, train_model_file;
  auto* train = app.add_subcommand("train", "train a model from a manifest or features");
  train->add_option("--manifest", train_manifest, "training manifest CSV");
  train->add_option("--features", train_features, "precomputed signature matrix");
  train->add_option("--sidecar", train_sidecar, "sidecar CSV for --features");
  train->add_option("--model", train_model_file, "output model file")->required();
  add_common(train, common);
  train->callback([&] {
    cmd_train(common, train_manifest, train_features, train_sidecar, train_model_file);
  });

  // predict
  std::string predict_model, predict_frames;
  int predict_start = 0, predict_end = -1;
  auto* predict_cmd = app.add_subcommand("predict", "classify one clip");
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  predict_cmd->add_option("--frames", predict_frames, "directory of PGM frames")->required();
  predict_cmd->add_option("--start", predict_start, "first frame of the clip range");
  predict_cmd->add_option("--end", predict_end, "last frame (inclusive; default: all)");
  add_common(predict_cmd, common, /*with_config=*/false);
  predict_cmd->callback(
      [&] { cmd_predict(common, predict_model, predict_frames, predict_start, predict_end); });

  // evaluate
  std::string eval_model, eval_manifest, eval_report, eval_log;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a model over a manifest");
  evaluate_cmd->add_option("--model", eval_model, "model file")->required();
  evaluate_cmd->add_option("--manifest", eval_manifest, "test manifest CSV")->required();
  evaluate_cmd->add_option("--report", eval_report, "output report file")->required();
  evaluate_cmd->add_option("--log", eval_log, "optional per-clip CSV log");
  add_common(evaluate_cmd, common, /*with_config=*/false);
  evaluate_cmd->callback(
      [&] { cmd_evaluate(common, eval_model, eval_manifest, eval_report, eval_log); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace flyact
