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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warmfold/data.hpp"
#include "warmfold/foldin.hpp"
#include "warmfold/model.hpp"

namespace warmfold {

using ItemList = std::vector<ItemIndex>;

// Top-k by descending score, ties broken by ascending item index. `excluded`
// must be sorted. Throws DimensionError when fewer than k candidates remain.
ItemList topk(const Vector& scores, std::size_t k,
              std::span<const ItemIndex> excluded);
ItemList topk(const EmbeddingModel& model, UserIndex user, std::size_t k,
              std::span<const ItemIndex> excluded);

// Per-user metrics; `relevant` must be sorted and nonempty.
double hit_at(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k);
double ndcg_at(std::span<const ItemIndex> ranked,
               std::span<const ItemIndex> relevant, std::size_t k);

// Averages over users with a nonempty relevant set; users with an empty set
// are skipped. Returns 0 when no user qualifies.
double hit_rate(std::span<const ItemList> recommendations,
                std::span<const ItemList> relevant, std::size_t k);
double ndcg(std::span<const ItemList> recommendations,
            std::span<const ItemList> relevant, std::size_t k);
// |union of the first k items of every list| / num_items.
double coverage(std::span<const ItemList> recommendations, std::size_t k,
                std::size_t num_items);

// Per-user timing summary in seconds.
struct TimingStats {
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double stddev = 0.0;
  double total = 0.0;
};
TimingStats summarize_timings(std::vector<double> seconds);

// Everything the protocol needs from a split, built once and shared by every
// strategy so all of them see the same candidates and ground truth.
struct EvalContext {
  InteractionMatrix train;
  InteractionMatrix warm;
  std::vector<UserIndex> warm_users;
  // Users with train or warm history and nonempty ground truth. Test-only
  // users have no state under any strategy and are counted, not ranked.
  std::vector<UserIndex> test_users;
  std::vector<ItemList> truth;        // parallel to test_users
  std::vector<char> rankable;         // item has a training embedding
  std::size_t dropped_test_users = 0;    // ground truth empty after exclusion
  std::size_t stateless_test_users = 0;  // no train or warm history

  // Sorted train + warm history plus every unrankable item.
  ItemList exclusions(UserIndex user) const;
};

EvalContext make_eval_context(const TemporalSplit& split);

struct UserFoldIn {
  UserIndex user = 0;
  double beta = 0.0;
  std::int64_t degree = 0;
  Vector embedding;
  std::int64_t time_ns = 0;
};

struct FoldInRun {
  Strategy strategy = Strategy::kZero;
  std::vector<UserFoldIn> users;
  double plan_build_seconds = 0.0;
  std::size_t flagged = 0;
  std::optional<EmbeddingModel> retrained;  // full retrain only
};

// Folds in every warm user, timing each call after 5 discarded warm-up calls.
// Full retrain is timed as a whole and spread evenly over the warm users.
FoldInRun run_foldin(const EmbeddingModel& model, const EvalContext& context,
                     const TemporalSplit& split, Strategy strategy,
                     const SgdFoldInConfig& sgd = {},
                     const TrainConfig& retrain = {},
                     std::optional<FoldInPlan> plan = std::nullopt);

// Copy of the model with folded-in rows and their recomputed degree and beta.
// The zero strategy leaves the model untouched.
EmbeddingModel apply_foldin(const EmbeddingModel& model, const FoldInRun& run);

struct MetricRow {
  std::string strategy;
  std::size_t users = 0;       // evaluated users
  std::size_t cold_users = 0;  // evaluated users without any model state
  std::vector<std::size_t> ks;
  std::vector<double> hit_rate;  // parallel to ks
  std::vector<double> ndcg;      // parallel to ks
  double coverage = 0.0;         // at max(ks)
};

MetricRow evaluate_model(const EmbeddingModel& model,
                         const EvalContext& context,
                         std::span<const std::size_t> ks,
                         std::string strategy_name);

struct EvalReport {
  MetricRow metrics;
  TimingStats timing;
  double plan_build_seconds = 0.0;
  std::size_t flagged = 0;
};

EvalReport evaluate_strategy(const EmbeddingModel& model,
                             const TemporalSplit& split,
                             const EvalContext& context, Strategy strategy,
                             std::span<const std::size_t> ks,
                             const SgdFoldInConfig& sgd = {},
                             const TrainConfig& retrain = {});

// metrics.csv: strategy,users,cold_users,hr@k...,ndcg@k...,coverage@K
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
void print_metric_table(std::ostream& out, std::span<const MetricRow> rows);

// Grid search of the SGD baseline on the warm split alone: each tuning user's
// latest warm item is held out, the rest is folded in and the held-out item
// is ranked. Configurations that diverge score -1.
struct SgdTuning {
  SgdFoldInConfig best;
  double best_ndcg = -1.0;
  struct Entry {
    double learning_rate;
    double mix;
    double ndcg;
  };
  std::vector<Entry> grid;
  std::size_t users = 0;
};

SgdTuning tune_sgd(const EmbeddingModel& model, const EvalContext& context,
                   const InteractionLog& warm, const SgdFoldInConfig& base,
                   std::span<const double> learning_rates,
                   std::span<const double> mixes, std::size_t max_users,
                   std::uint64_t seed);

// Latency scaling on synthetic catalogues.
struct ScalingOptions {
  std::size_t rank = 32;
  std::vector<std::size_t> sizes{1000, 10000, 100000, 1000000};
  std::size_t trials = 100;
  int sgd_steps = 50;
  double history_mean = 20.0;
  double zipf_exponent = 1.1;
  bool include_sgd = true;
  std::uint64_t seed = 0;
};

struct ScalingRow {
  std::string strategy;
  std::size_t num_items = 0;
  std::size_t rank = 0;
  std::size_t trials = 0;
  double mean = 0.0;  // seconds per user
  double stddev = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double plan_build_seconds = 0.0;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  bool partial = false;  // a size was skipped for lack of memory
  std::vector<std::size_t> skipped;
};

ScalingTable scaling_bench(const ScalingOptions& options);
void write_scaling_csv(std::ostream& out, const ScalingTable& table);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace warmfold
