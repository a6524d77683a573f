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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "flyact/errors.hpp"
#include "flyact/sift3d.hpp"

namespace flyact {

/// One clip's fixed-length feature vector: the element-wise mean of its
/// descriptors, L2-normalized.
struct Signature {
  std::string clip_id;
  std::vector<double> values;
};

Signature pool_signature(const std::vector<Descriptor>& descriptors, std::string clip_id);
Signature pool_signature(const std::vector<std::pair<InterestPoint, Descriptor>>& described,
                         std::string clip_id);

/// A stack of signatures with their clip ids and labels, row i of `matrix`
/// belonging to clip_ids[i] / labels[i].
struct SignatureSet {
  Eigen::MatrixXd matrix;
  std::vector<std::string> clip_ids;
  std::vector<std::string> labels;
};

// Signature matrix container: u64 LE rows, u64 LE cols, row-major f64 LE,
// plus a sidecar CSV `clip_id,label,row_index`.
void write_signature_set(const SignatureSet& set, const std::filesystem::path& matrix_file,
                         const std::filesystem::path& sidecar_csv);
SignatureSet read_signature_set(const std::filesystem::path& matrix_file,
                                const std::filesystem::path& sidecar_csv);

}  // namespace flyact
