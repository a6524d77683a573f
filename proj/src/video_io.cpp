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

#include "flyact/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "flyact/rng.hpp"

namespace flyact {
namespace {

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Reads one whitespace/comment-delimited PGM header token.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

PgmImage read_pgm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UnsupportedFormat("cannot open " + file.string());

  const std::string magic = next_pgm_token(in);
  if (magic != "P5") {
    throw UnsupportedFormat(file.string() + ": expected binary grayscale PGM (P5), got '" +
                            magic + "'");
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_pgm_token(in));
    height = std::stoi(next_pgm_token(in));
    maxval = std::stoi(next_pgm_token(in));
  } catch (const std::exception&) {
    throw UnsupportedFormat(file.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0) {
    throw UnsupportedFormat(file.string() + ": bad PGM dimensions");
  }
  if (maxval != 255) {
    throw UnsupportedFormat(file.string() + ": only 8-bit PGM (maxval 255) is supported");
  }

  PgmImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw UnsupportedFormat(file.string() + ": truncated PGM payload");
  }
  return img;
}

void write_pgm(const std::filesystem::path& file, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw DataError("short write to " + file.string());
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_frame_index(const std::string& text, int line_no) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a frame index, got '" + text + "'", line_no);
  }
  if (used != text.size() || value < 0) {
    throw ParseError("expected a non-negative frame index, got '" + text + "'", line_no);
  }
  return value;
}

}  // namespace

FrameVolume load_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw EmptyDirectory("cannot read directory " + dir.string());
  if (files.empty()) throw EmptyDirectory("no .pgm frames in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  FrameVolume vol;
  for (std::size_t t = 0; t < files.size(); ++t) {
    const PgmImage img = read_pgm(files[t]);
    if (t == 0) {
      vol = FrameVolume(img.width, img.height, static_cast<int>(files.size()));
    } else if (img.width != vol.width || img.height != vol.height) {
      throw DimensionMismatch(files[t].string() + ": frame is " + std::to_string(img.width) +
                              "x" + std::to_string(img.height) + ", expected " +
                              std::to_string(vol.width) + "x" + std::to_string(vol.height));
    }
    auto frame = vol.frame(static_cast<int>(t));
    for (std::size_t i = 0; i < frame.size(); ++i) {
      frame[i] = static_cast<double>(img.pixels[i]) / 255.0;
    }
  }
  return vol;
}

void write_frames(const FrameVolume& vol, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(vol.width) * vol.height);
  for (int t = 0; t < vol.num_frames; ++t) {
    const auto frame = vol.frame(t);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double v = std::clamp(frame[i], 0.0, 1.0);
      bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.pgm", t);
    write_pgm(dir / name, vol.width, vol.height, bytes);
  }
}

FrameVolume extract_clip(const FrameVolume& vol, const ClipAnnotation& ann) {
  if (ann.start_frame < 0 || ann.start_frame > ann.end_frame ||
      ann.end_frame >= vol.num_frames) {
    throw OutOfRange("clip '" + ann.clip_id + "' frames [" + std::to_string(ann.start_frame) +
                     ", " + std::to_string(ann.end_frame) + "] out of range for " +
                     std::to_string(vol.num_frames) + " frames");
  }
  const int frames = ann.end_frame - ann.start_frame + 1;
  FrameVolume clip(vol.width, vol.height, frames);
  std::copy_n(vol.data.begin() + static_cast<std::ptrdiff_t>(vol.index(0, 0, ann.start_frame)),
              clip.data.size(), clip.data.begin());
  return clip;
}

DatasetManifest parse_manifest(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open manifest " + file.string());

  static const std::string kHeader = "clip_id,frames_path,label,start_frame,end_frame";
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty manifest", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw ParseError("manifest header must be '" + kHeader + "'", 1);
  }

  DatasetManifest manifest;
  std::map<std::string, int> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 5) {
      throw ParseError("expected 5 comma-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    ManifestEntry entry;
    entry.annotation.clip_id = fields[0];
    entry.frames_path = fields[1];
    entry.annotation.label = fields[2];
    entry.annotation.start_frame = parse_frame_index(fields[3], line_no);
    entry.annotation.end_frame = parse_frame_index(fields[4], line_no);
    if (entry.annotation.clip_id.empty() || entry.frames_path.empty() ||
        entry.annotation.label.empty()) {
      throw ParseError("clip_id, frames_path and label must be non-empty", line_no);
    }
    if (entry.annotation.end_frame < entry.annotation.start_frame) {
      throw ParseError("end_frame precedes start_frame", line_no);
    }
    if (!seen.emplace(entry.annotation.clip_id, line_no).second) {
      throw DuplicateClipId("duplicate clip_id '" + entry.annotation.clip_id + "' at line " +
                            std::to_string(line_no));
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write manifest " + file.string());
  out << "clip_id,frames_path,label,start_frame,end_frame\n";
  for (const auto& entry : manifest.entries) {
    out << entry.annotation.clip_id << ',' << entry.frames_path << ','
        << entry.annotation.label << ',' << entry.annotation.start_frame << ','
        << entry.annotation.end_frame << '\n';
  }
}

std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          const SplitSpec& spec) {
  if (spec.train_per_class < 1) throw DataError("train_per_class must be >= 1");

  std::map<std::string, std::vector<std::size_t>> by_class;  // sorted by class name
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    by_class[manifest.entries[i].annotation.label].push_back(i);
  }

  std::vector<bool> in_train(manifest.entries.size(), false);
  SplitMix64 rng(spec.seed);
  for (auto& [label, indices] : by_class) {
    if (static_cast<int>(indices.size()) <= spec.train_per_class) {
      throw InsufficientSamples("class '" + label + "' has " +
                                std::to_string(indices.size()) + " entries, needs more than " +
                                std::to_string(spec.train_per_class));
    }
    shuffle(indices, rng);
    for (int k = 0; k < spec.train_per_class; ++k) in_train[indices[k]] = true;
  }

  DatasetManifest train, test;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    (in_train[i] ? train : test).entries.push_back(manifest.entries[i]);
  }
  return {std::move(train), std::move(test)};
}

SyntheticPattern parse_pattern(const std::string& name) {
  if (name == "orbiting_blob") return SyntheticPattern::kOrbitingBlob;
  if (name == "oscillating_blob") return SyntheticPattern::kOscillatingBlob;
  if (name == "static_scene") return SyntheticPattern::kStaticScene;
  throw DataError("unknown synthetic pattern '" + name +
                  "' (expected orbiting_blob, oscillating_blob or static_scene)");
}

std::string pattern_name(SyntheticPattern pattern) {
  switch (pattern) {
    case SyntheticPattern::kOrbitingBlob: return "orbiting_blob";
    case SyntheticPattern::kOscillatingBlob: return "oscillating_blob";
    case SyntheticPattern::kStaticScene: return "static_scene";
  }
  return "?";
}

SyntheticClip generate_synthetic(SyntheticPattern pattern, int width, int height,
                                 int num_frames, double noise_sigma, std::uint64_t seed) {
  constexpr int kMinFrames = 11;  // two default temporal scales plus one
  if (width < 32 || height < 32 || num_frames < kMinFrames) {
    throw BadDimensions("synthetic clips need width, height >= 32 and num_frames >= " +
                        std::to_string(kMinFrames));
  }
  if (noise_sigma < 0.0) throw BadDimensions("noise_sigma must be >= 0");

  const double cx = width / 2.0;
  const double cy = height / 2.0;
  const double radius = std::min(width, height) / 4.0;
  const double two_pi = 2.0 * std::numbers::pi;

  SyntheticClip clip;
  clip.volume = FrameVolume(width, height, num_frames);
  clip.ground_truth.reserve(num_frames);

  for (int t = 0; t < num_frames; ++t) {
    const double phase = two_pi * t / kSynthPeriodFrames;
    double bx = cx, by = cy;
    switch (pattern) {
      case SyntheticPattern::kOrbitingBlob:
        bx = cx + radius * std::cos(phase);
        by = cy + radius * std::sin(phase);
        break;
      case SyntheticPattern::kOscillatingBlob:
        bx = cx + radius * std::sin(phase);
        break;
      case SyntheticPattern::kStaticScene:
        break;
    }
    clip.ground_truth.push_back({bx, by, t});

    auto frame = clip.volume.frame(t);
    const double inv_two_sigma2 = 1.0 / (2.0 * kSynthBlobSigma * kSynthBlobSigma);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - bx;
        const double dy = y - by;
        frame[static_cast<std::size_t>(y) * width + x] =
            kSynthBackground + kSynthAmplitude * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
      }
    }
  }

  if (noise_sigma > 0.0) {
    SplitMix64 rng(seed);
    for (double& v : clip.volume.data) {
      v = std::clamp(v + noise_sigma * rng.gaussian(), 0.0, 1.0);
    }
  }
  return clip;
}

}  // namespace flyact
