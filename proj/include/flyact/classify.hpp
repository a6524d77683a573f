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

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flyact/pipeline.hpp"
#include "flyact/srkda.hpp"

namespace flyact {

/// Row = true class, column = predicted class. Clips whose features could
/// not be computed are tallied per true class in `failed` and count toward
/// the total (and so against accuracy), never toward any cell.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::int64_t> counts;  // c*c row-major
  std::vector<std::int64_t> failed;  // per true class

  std::int64_t& at(int true_idx, int pred_idx) {
    return counts[static_cast<std::size_t>(true_idx) * class_names.size() + pred_idx];
  }
  std::int64_t at(int true_idx, int pred_idx) const {
    return counts[static_cast<std::size_t>(true_idx) * class_names.size() + pred_idx];
  }
  std::int64_t total() const;
  std::int64_t correct() const;  // trace
  double accuracy() const;       // trace / total
};

/// Complete trained pipeline state: the SR-KDA projection, per-class
/// centroids in projected space, and the full configuration snapshot the
/// model was built with.
struct TrainedModel {
  ProjectionModel projection;
  Eigen::MatrixXd centroids;  // c x (c-1), row order = class_names
  std::vector<std::string> class_names;
  PipelineConfig pipeline_config;
};

struct TrainResult {
  TrainedModel model;
  std::vector<std::string> warnings;  // e.g. degenerate class geometry
};

/// Trains on signature rows + string labels: builds the kernel (resolving a
/// median-heuristic gamma when unset), solves the spectral-regression
/// system, projects the training set and stores per-class centroids.
/// Class names are kept sorted. Requires >= 2 classes and >= 2 samples per
/// class.
TrainResult train_model(const Eigen::MatrixXd& signatures,
                        const std::vector<std::string>& labels, const KernelConfig& kernel,
                        const PipelineConfig& snapshot);

struct Prediction {
  std::string label;
  Eigen::VectorXd distances;  // to each class centroid, class_names order
};

/// Nearest-centroid rule in projected space; exact distance ties go to the
/// lexicographically smallest class name.
Prediction predict(const TrainedModel& model, const Eigen::VectorXd& signature);

struct EvalItem {
  std::string clip_id;
  std::string true_label;
  std::optional<Eigen::VectorXd> signature;  // empty = upstream failure
};

struct ClipOutcome {
  std::string clip_id;
  std::string true_label;
  std::string predicted;  // empty when failed
  double margin = 0.0;    // runner-up distance minus best distance
  bool failed = false;
};

struct EvalReport {
  ConfusionMatrix matrix;
  std::vector<ClipOutcome> log;
  double accuracy() const { return matrix.accuracy(); }
};

EvalReport evaluate(const TrainedModel& model, const std::vector<EvalItem>& items);

/// Key-value report: accuracy, totals, per-class precision/recall/failed,
/// confusion matrix rows, then the effective config for provenance.
std::string render_report(const EvalReport& report, const PipelineConfig& cfg);

/// Per-clip CSV `clip_id,true,predicted,distance_margin`; failed clips have
/// empty predicted and margin fields.
void write_clip_log(const std::vector<ClipOutcome>& log, const std::filesystem::path& file);

}  // namespace flyact
