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

#include "flyact/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "flyact/format.hpp"

namespace flyact {
namespace {

int class_index(const std::vector<std::string>& names, const std::string& label) {
  const auto it = std::find(names.begin(), names.end(), label);
  if (it == names.end()) {
    throw UnknownLabel("label '" + label + "' is not a class of this model");
  }
  return static_cast<int>(it - names.begin());
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto v : counts) sum += v;
  for (const auto v : failed) sum += v;
  return sum;
}

std::int64_t ConfusionMatrix::correct() const {
  std::int64_t trace = 0;
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    trace += counts[k * class_names.size() + k];
  }
  return trace;
}

double ConfusionMatrix::accuracy() const {
  const std::int64_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

TrainResult train_model(const Eigen::MatrixXd& signatures,
                        const std::vector<std::string>& labels, const KernelConfig& kernel,
                        const PipelineConfig& snapshot) {
  if (static_cast<Eigen::Index>(labels.size()) != signatures.rows()) {
    throw DimensionMismatch("label count does not match signature rows");
  }

  std::set<std::string> unique(labels.begin(), labels.end());
  std::vector<std::string> class_names(unique.begin(), unique.end());  // sorted
  const int c = static_cast<int>(class_names.size());
  if (c < 2) throw MissingClass("training needs at least 2 classes");

  std::vector<int> label_ids(labels.size());
  std::vector<int> class_counts(c, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_ids[i] = class_index(class_names, labels[i]);
    ++class_counts[label_ids[i]];
  }
  for (int k = 0; k < c; ++k) {
    if (class_counts[k] < 2) {
      throw InsufficientSamples("class '" + class_names[k] + "' needs >= 2 samples");
    }
  }

  KernelConfig resolved = kernel;
  if (resolved.gamma <= 0.0) {
    resolved.gamma = resolved.kind == KernelKind::kRbf ? median_gamma(signatures) : 1.0;
  }

  const Eigen::MatrixXd k = build_kernel(signatures, resolved);
  const Eigen::MatrixXd responses = response_vectors(label_ids, c);
  Eigen::MatrixXd omega = solve_projection(k, responses, resolved.regularization_delta);

  // Fix the eigenvector-style sign ambiguity for reproducible model files:
  // flipping a column flips its response column too, so the solve still holds.
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    Eigen::Index arg = 0;
    omega.col(j).cwiseAbs().maxCoeff(&arg);
    if (omega(arg, j) < 0.0) omega.col(j) = -omega.col(j);
  }

  TrainResult result;
  result.model.projection =
      ProjectionModel{signatures, std::move(omega), resolved, class_names};
  result.model.class_names = class_names;
  result.model.pipeline_config = snapshot;
  result.model.pipeline_config.kernel = resolved;

  // Centroids from the same out-of-sample path predict() uses, so training
  // points land exactly where a loaded model would put them.
  const Eigen::MatrixXd projected = project_batch(result.model.projection, signatures);
  result.model.centroids = Eigen::MatrixXd::Zero(c, projected.cols());
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    result.model.centroids.row(label_ids[static_cast<std::size_t>(i)]) += projected.row(i);
  }
  for (int cls = 0; cls < c; ++cls) {
    result.model.centroids.row(cls) /= static_cast<double>(class_counts[cls]);
  }

  for (int cls = 0; cls < c; ++cls) {
    for (int other = 0; other < c; ++other) {
      if (other == cls) continue;
      bool all_on_other = true;
      for (Eigen::Index i = 0; i < projected.rows() && all_on_other; ++i) {
        if (label_ids[static_cast<std::size_t>(i)] != cls) continue;
        all_on_other = (projected.row(i) - result.model.centroids.row(other)).norm() < 1e-12;
      }
      if (all_on_other) {
        result.warnings.push_back("degenerate class: every '" + class_names[cls] +
                                  "' sample projects onto the centroid of '" +
                                  class_names[other] + "'");
      }
    }
  }
  return result;
}

Prediction predict(const TrainedModel& model, const Eigen::VectorXd& signature) {
  const Eigen::VectorXd point = project(model.projection, signature);
  const int c = static_cast<int>(model.class_names.size());

  Prediction out;
  out.distances.resize(c);
  int best = 0;
  for (int k = 0; k < c; ++k) {
    out.distances(k) = (model.centroids.row(k).transpose() - point).norm();
    // strict less keeps the lexicographically smallest name on exact ties,
    // class_names being sorted
    if (k > 0 && out.distances(k) < out.distances(best)) best = k;
  }
  out.label = model.class_names[static_cast<std::size_t>(best)];
  return out;
}

EvalReport evaluate(const TrainedModel& model, const std::vector<EvalItem>& items) {
  if (items.empty()) throw EmptyTestSet("no clips to evaluate");
  const int c = static_cast<int>(model.class_names.size());

  EvalReport report;
  report.matrix.class_names = model.class_names;
  report.matrix.counts.assign(static_cast<std::size_t>(c) * c, 0);
  report.matrix.failed.assign(c, 0);

  for (const auto& item : items) {
    const int true_idx = class_index(model.class_names, item.true_label);
    ClipOutcome outcome;
    outcome.clip_id = item.clip_id;
    outcome.true_label = item.true_label;
    if (!item.signature) {
      outcome.failed = true;
      ++report.matrix.failed[true_idx];
    } else {
      const Prediction p = predict(model, *item.signature);
      outcome.predicted = p.label;
      Eigen::VectorXd sorted = p.distances;
      std::sort(sorted.data(), sorted.data() + sorted.size());
      outcome.margin = sorted(1) - sorted(0);
      ++report.matrix.at(true_idx, class_index(model.class_names, p.label));
    }
    report.log.push_back(std::move(outcome));
  }
  return report;
}

std::string render_report(const EvalReport& report, const PipelineConfig& cfg) {
  const auto& m = report.matrix;
  const int c = static_cast<int>(m.class_names.size());

  std::ostringstream out;
  out << "accuracy=" << format_double(m.accuracy()) << '\n';
  out << "clips_total=" << m.total() << '\n';
  std::int64_t failed_total = 0;
  for (const auto f : m.failed) failed_total += f;
  out << "clips_failed=" << failed_total << '\n';
  out << "classes=";
  for (int k = 0; k < c; ++k) out << (k ? "," : "") << m.class_names[k];
  out << '\n';

  for (int k = 0; k < c; ++k) {
    std::int64_t predicted_as = 0;   // column sum
    std::int64_t true_count = m.failed[k];
    for (int other = 0; other < c; ++other) {
      predicted_as += m.at(other, k);
      true_count += m.at(k, other);
    }
    const double precision =
        predicted_as == 0 ? std::numeric_limits<double>::quiet_NaN()
                          : static_cast<double>(m.at(k, k)) / static_cast<double>(predicted_as);
    const double recall =
        true_count == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(m.at(k, k)) / static_cast<double>(true_count);
    out << "class." << m.class_names[k] << ".precision=" << format_double(precision) << '\n';
    out << "class." << m.class_names[k] << ".recall=" << format_double(recall) << '\n';
    out << "class." << m.class_names[k] << ".failed=" << m.failed[k] << '\n';
  }

  out << "confusion_matrix=rows:true,cols:predicted\n";
  for (int k = 0; k < c; ++k) {
    out << "row." << m.class_names[k] << '=';
    for (int j = 0; j < c; ++j) out << (j ? "," : "") << m.at(k, j);
    out << '\n';
  }

  out << "# effective configuration\n";
  for (const auto& [key, value] : config_items(cfg)) {
    out << "config." << key << '=' << value << '\n';
  }
  return out.str();
}

void write_clip_log(const std::vector<ClipOutcome>& log, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << "clip_id,true,predicted,distance_margin\n";
  for (const auto& entry : log) {
    out << entry.clip_id << ',' << entry.true_label << ',';
    if (entry.failed) {
      out << ",\n";  // empty predicted and margin mark an upstream failure
    } else {
      out << entry.predicted << ',' << format_double(entry.margin) << '\n';
    }
  }
}

}  // namespace flyact
