/*
 * Copyright 2026 The warmfold Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
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
#include <string_view>

#include "warmfold/model.hpp"

namespace warmfold {

// Model container, little-endian:
//
//   "WFLD1"            5 bytes magic
//   kind               u8   (1 = ultragcn, 2 = puresvd)
//   M, N, d            u64 each
//   lambda             f64
//   U                  f32[M*d] row-major
//   V                  f32[N*d] row-major
//   sigma              f32[d]   (puresvd only)
//   b_U, b_I           f64[M], f64[N]   (NaN marks an undefined b_U entry)
//   d_u, d_i           i64[M], i64[N]
//   checksum           u64 FNV-1a of every preceding byte
inline constexpr std::string_view kModelMagic = "WFLD1";

struct ModelHeader {
  ModelKind kind = ModelKind::kUltraGcn;
  std::uint64_t num_users = 0;
  std::uint64_t num_items = 0;
  std::uint64_t rank = 0;
  double lambda = 0.0;
  std::uint64_t checksum = 0;
  std::uint64_t file_size = 0;
};

// Returns the checksum written to the file.
std::uint64_t save_model(const std::filesystem::path& path,
                         const EmbeddingModel& model);

// Verifies size and checksum; throws CorruptFileError / ChecksumMismatchError.
EmbeddingModel load_model(const std::filesystem::path& path,
                          ModelHeader* header = nullptr);
ModelHeader inspect_model(const std::filesystem::path& path);

// Rounds embeddings through f32 as persistence does, so an in-memory model
// can be compared against one loaded from disk.
void round_to_storage_precision(EmbeddingModel& model);

}  // namespace warmfold
