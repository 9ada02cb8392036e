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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warmfold {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;
using Timestamp = std::int64_t;

struct Event {
  UserIndex user = 0;
  ItemIndex item = 0;
  Timestamp timestamp = 0;

  bool operator==(const Event&) const = default;
};

// Raw identifiers in first-appearance order; position == compact index.
struct IdMap {
  std::vector<std::string> users;
  std::vector<std::string> items;
};

// Timestamped (user, item) events over a dense index space [0, M) x [0, N).
// Subsets produced by a split keep the parent's dimensions and id map.
struct InteractionLog {
  std::vector<Event> events;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::shared_ptr<const IdMap> ids;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

enum class InputFormat { kAuto, kCsv, kTsv, kMovieLens };

InputFormat parse_input_format(std::string_view tag);
std::string_view to_string(InputFormat format);

// Reads `user<sep>item<sep>timestamp` records. '#' lines are skipped and a
// header line is detected when its timestamp column is not an integer. The
// MovieLens format is `user::item::rating::timestamp` with the rating ignored.
InteractionLog parse_interactions(std::istream& in, InputFormat format);
InteractionLog ingest(const std::filesystem::path& path, InputFormat format);

// Iteratively drops users with fewer than `min_user_count` events and items
// with fewer than `min_item_count` events until both hold, then recompacts.
// A threshold of 0 or 1 disables that side.
InteractionLog filter_min_counts(const InteractionLog& log,
                                 std::size_t min_user_count,
                                 std::size_t min_item_count);

struct SplitFractions {
  double train = 0.8;
  double warm = 0.1;
  double test = 0.1;
};

struct TemporalSplit {
  InteractionLog train;
  InteractionLog warm;
  InteractionLog test;
  Timestamp train_end = 0;  // t1: every train event has timestamp <= t1
  Timestamp warm_end = 0;   // t2: warm events lie in (t1, t2]
};

// Events are ordered by timestamp (stable in file order). Boundary timestamps
// are those of the events at the target cumulative counts; every event tied
// with a boundary goes to the earlier subset.
TemporalSplit temporal_split(const InteractionLog& log,
                             const SplitFractions& fractions);

struct SplitManifest {
  Timestamp train_end = 0;
  Timestamp warm_end = 0;
  std::size_t train_events = 0;
  std::size_t warm_events = 0;
  std::size_t test_events = 0;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::uint64_t dataset_hash = 0;

  bool operator==(const SplitManifest&) const = default;
};

SplitManifest make_manifest(const TemporalSplit& split,
                            std::uint64_t dataset_hash);
void write_split_manifest(const std::filesystem::path& path,
                          const SplitManifest& manifest);
SplitManifest read_split_manifest(const std::filesystem::path& path);

void write_id_map(const std::filesystem::path& dir, const IdMap& ids);

// Fingerprint of the event sequence and dimensions.
std::uint64_t log_fingerprint(const InteractionLog& log);

// Binary user-item matrix in compressed row form. Column indices within a
// row are strictly increasing; values are implicitly 1.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(std::size_t rows, std::size_t cols,
                    std::vector<std::size_t> row_offsets,
                    std::vector<ItemIndex> column_indices);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return column_indices_.size(); }

  std::span<const ItemIndex> row(UserIndex u) const {
    return {column_indices_.data() + row_offsets_[u],
            row_offsets_[u + 1] - row_offsets_[u]};
  }
  std::size_t row_size(UserIndex u) const {
    return row_offsets_[u + 1] - row_offsets_[u];
  }
  bool contains(UserIndex u, ItemIndex i) const;

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const ItemIndex> column_indices() const { return column_indices_; }

  std::vector<std::int64_t> row_counts() const;
  std::vector<std::int64_t> column_counts() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<ItemIndex> column_indices_;
};

// Duplicate (u, i) pairs collapse into one entry.
InteractionMatrix build_matrix(std::span<const Event> events, std::size_t rows,
                               std::size_t cols);
InteractionMatrix build_matrix(const InteractionLog& log);

// Degree-derived weights: beta_u = sqrt(d_u + 1) / d_u, beta_i = 1 / sqrt(d_i + 1).
// beta_u is undefined (NaN) for d_u = 0.
struct GraphStats {
  std::vector<std::int64_t> user_degrees;
  std::vector<std::int64_t> item_degrees;
  std::vector<double> user_beta;
  std::vector<double> item_beta;

  bool user_beta_defined(UserIndex u) const { return user_degrees[u] > 0; }
};

double user_weight(std::int64_t degree);  // NaN for degree 0
double item_weight(std::int64_t degree);

GraphStats graph_stats(const InteractionMatrix& matrix);

// A user's binary interaction vector a_u (train row union warm events) with
// the degree and weight recomputed from it.
struct MergedHistory {
  UserIndex user = 0;
  std::vector<ItemIndex> items;  // sorted, unique
  std::int64_t degree = 0;
  double beta = 0.0;
};

// `warm` is the deduplicated warm log in matrix form; see build_matrix.
MergedHistory merge_for_foldin(const InteractionMatrix& train,
                               const InteractionMatrix& warm, UserIndex user);
MergedHistory merge_for_foldin(const InteractionMatrix& train,
                               const InteractionLog& warm, UserIndex user);

// Distinct users with at least one event, ascending.
std::vector<UserIndex> active_users(const InteractionLog& log);

}  // namespace warmfold
