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

#include <cstdint>
#include <filesystem>

#include "flyact/classify.hpp"

namespace flyact {

// Model container layout, all little-endian:
//   8-byte magic "FLYACTMD"
//   u16 major version, u16 minor version
//   u32 header length, then that many bytes of UTF-8 `key=value` lines
//   (class names, array shapes, full pipeline config)
//   raw f64 arrays: train_signatures, omega, centroids (row-major)
//   u32 CRC-32 of every preceding byte
// save -> load -> save is byte-identical.

inline constexpr std::uint16_t kModelMajorVersion = 1;
inline constexpr std::uint16_t kModelMinorVersion = 0;

void save_model(const TrainedModel& model, const std::filesystem::path& file);

/// Throws VersionMismatch on a foreign major version and CorruptFile on a
/// bad magic, bad shape, truncation, or checksum failure.
TrainedModel load_model(const std::filesystem::path& file);

}  // namespace flyact
