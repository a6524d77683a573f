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

#include "flyact/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are unsupported");

namespace flyact {
namespace {

constexpr char kMagic[8] = {'F', 'L', 'Y', 'A', 'C', 'T', 'M', 'D'};

void append_raw(std::string& buf, const void* data, std::size_t size) {
  buf.append(static_cast<const char*>(data), size);
}

void append_matrix(std::string& buf, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      append_raw(buf, &v, sizeof(v));
    }
  }
}

std::string build_header(const TrainedModel& model) {
  std::ostringstream h;
  h << "classes=";
  for (std::size_t i = 0; i < model.class_names.size(); ++i) {
    h << (i ? "," : "") << model.class_names[i];
  }
  h << '\n';
  h << "rows=" << model.projection.train_signatures.rows() << '\n';
  h << "dim=" << model.projection.train_signatures.cols() << '\n';
  h << "discriminants=" << model.projection.coefficients_omega.cols() << '\n';
  for (const auto& [key, value] : config_items(model.pipeline_config)) {
    h << "config." << key << '=' << value << '\n';
  }
  return h.str();
}

class Reader {
 public:
  Reader(const std::string& buf, const std::string& name) : buf_(buf), name_(name) {}

  const void* take(std::size_t size) {
    if (pos_ + size > buf_.size()) {
      throw CorruptFile(name_ + ": truncated (needed " + std::to_string(size) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    }
    const void* p = buf_.data() + pos_;
    pos_ += size;
    return p;
  }

  template <typename T>
  T scalar() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scalar<double>();
    }
    return m;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

long long header_int(const std::map<std::string, std::string>& fields, const std::string& key,
                     const std::string& name) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw CorruptFile(name + ": header lacks '" + key + "'");
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw CorruptFile(name + ": bad header value for '" + key + "'");
  }
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& file) {
  const std::string header = build_header(model);

  std::string buf;
  append_raw(buf, kMagic, sizeof(kMagic));
  const std::uint16_t version[2] = {kModelMajorVersion, kModelMinorVersion};
  append_raw(buf, version, sizeof(version));
  const std::uint32_t header_len = static_cast<std::uint32_t>(header.size());
  append_raw(buf, &header_len, sizeof(header_len));
  buf += header;
  append_matrix(buf, model.projection.train_signatures);
  append_matrix(buf, model.projection.coefficients_omega);
  append_matrix(buf, model.centroids);

  const std::uint32_t crc = static_cast<std::uint32_t>(
      crc32_z(0, reinterpret_cast<const Bytef*>(buf.data()), buf.size()));
  append_raw(buf, &crc, sizeof(crc));

  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write to " + file.string());
}

TrainedModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open model " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  const std::string name = file.filename().string();

  Reader reader(buf, name);
  char magic[8];
  std::memcpy(magic, reader.take(sizeof(magic)), sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CorruptFile(name + ": not a model file (bad magic)");
  }
  const auto major = reader.scalar<std::uint16_t>();
  reader.scalar<std::uint16_t>();  // minor: additive changes only
  if (major != kModelMajorVersion) {
    throw VersionMismatch(name + ": major version " + std::to_string(major) +
                          ", this build reads " + std::to_string(kModelMajorVersion));
  }

  const auto header_len = reader.scalar<std::uint32_t>();
  std::string header(static_cast<const char*>(reader.take(header_len)), header_len);

  std::map<std::string, std::string> fields;
  std::vector<std::pair<std::string, std::string>> config_entries;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CorruptFile(name + ": malformed header line");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("config.", 0) == 0) {
      config_entries.emplace_back(key.substr(7), value);
    } else {
      fields[key] = value;
    }
  }

  const auto classes_it = fields.find("classes");
  if (classes_it == fields.end()) throw CorruptFile(name + ": header lacks 'classes'");
  std::vector<std::string> class_names;
  {
    std::istringstream cs(classes_it->second);
    std::string item;
    while (std::getline(cs, item, ',')) class_names.push_back(item);
  }
  const long long rows = header_int(fields, "rows", name);
  const long long dim = header_int(fields, "dim", name);
  const long long discriminants = header_int(fields, "discriminants", name);
  if (rows < 1 || dim < 1 || discriminants < 1 || class_names.size() < 2 ||
      discriminants != static_cast<long long>(class_names.size()) - 1) {
    throw CorruptFile(name + ": inconsistent header shapes");
  }

  const std::size_t array_doubles =
      static_cast<std::size_t>(rows) * dim + static_cast<std::size_t>(rows) * discriminants +
      class_names.size() * static_cast<std::size_t>(discriminants);
  const std::size_t expected_size = reader.pos() + array_doubles * sizeof(double) + 4;
  if (buf.size() != expected_size) {
    throw CorruptFile(name + ": size is " + std::to_string(buf.size()) + " bytes, expected " +
                      std::to_string(expected_size));
  }

  const std::uint32_t stored_crc =
      [&] {
        std::uint32_t v;
        std::memcpy(&v, buf.data() + buf.size() - 4, 4);
        return v;
      }();
  const std::uint32_t actual_crc = static_cast<std::uint32_t>(
      crc32_z(0, reinterpret_cast<const Bytef*>(buf.data()), buf.size() - 4));
  if (stored_crc != actual_crc) throw CorruptFile(name + ": checksum mismatch");

  TrainedModel model;
  model.class_names = class_names;
  model.pipeline_config = PipelineConfig{};
  for (const auto& [key, value] : config_entries) {
    try {
      apply_config_value(model.pipeline_config, key, value);
    } catch (const ConfigError& e) {
      throw CorruptFile(name + ": bad config entry: " + e.what());
    }
  }
  model.projection.train_signatures = reader.matrix(rows, dim);
  model.projection.coefficients_omega = reader.matrix(rows, discriminants);
  model.centroids = reader.matrix(static_cast<Eigen::Index>(class_names.size()), discriminants);
  model.projection.kernel = model.pipeline_config.kernel;
  model.projection.class_names = class_names;
  return model;
}

}  // namespace flyact
