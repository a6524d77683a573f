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

#include "flyact/signature.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace flyact {

Signature pool_signature(const std::vector<Descriptor>& descriptors, std::string clip_id) {
  if (descriptors.empty()) {
    throw NoFeatures("clip '" + clip_id + "' produced no descriptors");
  }
  const std::size_t dim = descriptors.front().values.size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& d : descriptors) {
    if (d.values.size() != dim) throw DimensionMismatch("descriptor lengths differ");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += d.values[i];
  }
  const double inv_count = 1.0 / static_cast<double>(descriptors.size());
  double norm2 = 0.0;
  for (double& v : mean) {
    v *= inv_count;
    norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  if (norm <= 0.0) throw NoFeatures("clip '" + clip_id + "' pooled to a zero vector");
  for (double& v : mean) v /= norm;

  return Signature{std::move(clip_id), std::move(mean)};
}

Signature pool_signature(const std::vector<std::pair<InterestPoint, Descriptor>>& described,
                         std::string clip_id) {
  std::vector<Descriptor> descriptors;
  descriptors.reserve(described.size());
  for (const auto& [point, descriptor] : described) descriptors.push_back(descriptor);
  return pool_signature(descriptors, std::move(clip_id));
}

void write_signature_set(const SignatureSet& set, const std::filesystem::path& matrix_file,
                         const std::filesystem::path& sidecar_csv) {
  const std::uint64_t rows = static_cast<std::uint64_t>(set.matrix.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(set.matrix.cols());
  if (set.clip_ids.size() != rows || set.labels.size() != rows) {
    throw DimensionMismatch("signature sidecar rows do not match the matrix");
  }

  std::ofstream out(matrix_file, std::ios::binary);
  if (!out) throw DataError("cannot write " + matrix_file.string());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double v = set.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw DataError("short write to " + matrix_file.string());

  std::ofstream side(sidecar_csv);
  if (!side) throw DataError("cannot write " + sidecar_csv.string());
  side << "clip_id,label,row_index\n";
  for (std::uint64_t r = 0; r < rows; ++r) {
    side << set.clip_ids[r] << ',' << set.labels[r] << ',' << r << '\n';
  }
}

SignatureSet read_signature_set(const std::filesystem::path& matrix_file,
                                const std::filesystem::path& sidecar_csv) {
  std::ifstream in(matrix_file, std::ios::binary);
  if (!in) throw DataError("cannot open " + matrix_file.string());
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw CorruptFile(matrix_file.string() + ": missing shape");

  SignatureSet set;
  set.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw CorruptFile(matrix_file.string() + ": truncated matrix payload");
      set.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }

  std::ifstream side(sidecar_csv);
  if (!side) throw DataError("cannot open " + sidecar_csv.string());
  std::string line;
  if (!std::getline(side, line)) throw ParseError("empty sidecar", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "clip_id,label,row_index") throw ParseError("bad sidecar header", 1);
  int line_no = 1;
  while (std::getline(side, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string clip_id, label, row_text;
    if (!std::getline(ss, clip_id, ',') || !std::getline(ss, label, ',') ||
        !std::getline(ss, row_text)) {
      throw ParseError("bad sidecar row", line_no);
    }
    const std::size_t row = set.clip_ids.size();
    if (row_text != std::to_string(row)) {
      throw ParseError("sidecar row_index out of order", line_no);
    }
    set.clip_ids.push_back(clip_id);
    set.labels.push_back(label);
  }
  if (set.clip_ids.size() != rows) {
    throw ParseError("sidecar lists " + std::to_string(set.clip_ids.size()) + " rows, matrix has " +
                         std::to_string(rows),
                     line_no);
  }
  return set;
}

}  // namespace flyact
