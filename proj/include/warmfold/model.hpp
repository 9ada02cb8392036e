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
#include <span>
#include <string_view>
#include <vector>

#include "warmfold/data.hpp"
#include "warmfold/linalg.hpp"

namespace warmfold {

enum class ModelKind : std::uint8_t { kUltraGcn = 1, kPureSvd = 2 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view tag);

// User and item embeddings plus the graph statistics they were trained on.
//
// UltraGCN: score(u, i) = beta_u * beta_i * <e_u, e_i>.
// PureSVD:  score(u, i) = <e_u, sigma .* v_i>, i.e. rows of U against V Sigma.
struct EmbeddingModel {
  ModelKind kind = ModelKind::kUltraGcn;
  RowMatrix users;  // M x d
  RowMatrix items;  // N x d
  GraphStats stats;
  Vector sigma;         // PureSVD only
  double lambda = 0.0;  // UltraGCN only

  std::size_t num_users() const { return static_cast<std::size_t>(users.rows()); }
  std::size_t num_items() const { return static_cast<std::size_t>(items.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(items.cols()); }
};

// Hash of everything a fold-in plan depends on: kind, dimensions, item
// embeddings, sigma and item-side statistics.
std::uint64_t item_side_fingerprint(const EmbeddingModel& model);

// Users and items with zero training degree have no embedding. Their rows are
// zeroed so they contribute nothing to scores or fold-in.
void clear_untrained_rows(EmbeddingModel& model);

double score(const EmbeddingModel& model, UserIndex u, ItemIndex i);
Vector score_all(const EmbeddingModel& model, UserIndex u);

// Item scores for an arbitrary user embedding, omitting the positive beta_u
// factor (so rankings match score_all without needing beta_u).
Vector item_scores(const EmbeddingModel& model, const Vector& user_embedding);

struct TrainConfig {
  std::size_t rank = 64;
  double lambda = 1.0;
  std::size_t negatives_per_positive = 64;
  double learning_rate = 1e-3;
  int epochs = 50;
  std::size_t batch_size = 1024;
  double init_scale = 1e-2;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

struct TrainingReport {
  std::vector<double> epoch_loss;  // mean loss per (positive, negative) pair
  double seconds = 0.0;
};

EmbeddingModel train_ultragcn(const InteractionMatrix& matrix,
                              const GraphStats& stats,
                              const TrainConfig& config,
                              TrainingReport* report = nullptr);

EmbeddingModel train_puresvd(const InteractionMatrix& matrix, std::size_t rank,
                             std::uint64_t seed);

// One positive with its sampled negatives. Negatives must not be items the
// user interacted with.
struct TrainingSample {
  UserIndex user = 0;
  ItemIndex positive = 0;
  std::vector<ItemIndex> negatives;
};

// L = weighted * L_B + plain * L_O. Training uses {1, lambda}.
struct LossWeights {
  double weighted = 1.0;
  double plain = 1.0;
};

struct LossGradient {
  double loss = 0.0;
  RowMatrix user_grad;  // M x d
  RowMatrix item_grad;  // N x d
};

// Sampled loss summed over every (positive, negative) pair in the batch.
LossGradient loss_and_gradient(const EmbeddingModel& model,
                               std::span<const TrainingSample> batch,
                               const LossWeights& weights);

double log_sigmoid(double x);

}  // namespace warmfold
