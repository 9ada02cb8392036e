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
#include <vector>

#include "warmfold/data.hpp"
#include "warmfold/model.hpp"
#include "warmfold/random.hpp"

namespace warmfold::synthetic {

// Samples item ranks 0..n-1 with P(i) proportional to (i + 1)^-exponent.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

// A model with Gaussian item embeddings (entries N(0, 1/d)) and item degrees
// following a Zipf popularity profile. User side is empty.
EmbeddingModel random_item_side(std::size_t num_items, std::size_t rank,
                                double zipf_exponent, std::uint64_t seed);

// Distinct items for a user whose history length is geometric with the given
// mean, drawn by Zipf popularity.
std::vector<ItemIndex> sample_history(const ZipfSampler& popularity,
                                      double mean_length, Rng& rng);

// Community dataset: users and items are partitioned into `blocks`; user u
// belongs to block u % blocks and item i to block i / items_per_block. Train
// events come from the user's own block. A `flip_fraction` of users move to
// the next block during the warm period; their warm and test events come from
// the new block. Other users draw their test events from their own block.
struct BlockOptions {
  std::size_t users = 200;
  std::size_t blocks = 4;
  std::size_t items_per_block = 30;
  std::size_t train_per_user = 6;
  std::size_t warm_per_flipped_user = 15;
  std::size_t test_per_user = 3;
  double flip_fraction = 0.5;
  std::uint64_t seed = 7;
};

struct BlockDataset {
  InteractionLog log;     // all events, time-ordered eras
  TemporalSplit split;    // train / warm / test by era
  std::vector<char> flipped;
  std::vector<std::size_t> user_block;  // block the user ends in
  BlockOptions options;

  std::size_t item_block(ItemIndex i) const { return i / options.items_per_block; }
};

BlockDataset block_dataset(const BlockOptions& options);

// Latent-factor implicit-feedback log with MovieLens-like shape, for
// exercising the pipeline when no real dataset is available.
struct LatentOptions {
  std::size_t users = 1000;
  std::size_t items = 500;
  std::size_t latent_rank = 8;
  double mean_history = 40.0;
  double zipf_exponent = 0.9;
  std::uint64_t seed = 11;
};

InteractionLog latent_log(const LatentOptions& options);

}  // namespace warmfold::synthetic
