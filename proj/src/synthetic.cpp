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

#include "warmfold/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "warmfold/error.hpp"

namespace warmfold::synthetic {

ZipfSampler::ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
  if (n == 0) throw DimensionError("Zipf sampler over an empty range");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::pow(static_cast<double>(i + 1), -exponent);
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
  const double u = NormalSampler::uniform(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                               cdf_.size() - 1);
}

EmbeddingModel random_item_side(std::size_t num_items, std::size_t rank,
                                double zipf_exponent, std::uint64_t seed) {
  EmbeddingModel model;
  model.kind = ModelKind::kUltraGcn;
  const auto n = static_cast<Eigen::Index>(num_items);
  const auto d = static_cast<Eigen::Index>(rank);
  model.items.resize(n, d);
  model.users.resize(0, d);
  Rng rng = make_rng(seed, "synthetic/items");
  NormalSampler normal;
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  for (Eigen::Index k = 0; k < model.items.size(); ++k) {
    model.items.data()[k] = scale * normal(rng);
  }
  // Degrees as if 20 interactions per item were spread by popularity.
  double norm = 0.0;
  for (std::size_t i = 0; i < num_items; ++i) {
    norm += std::pow(static_cast<double>(i + 1), -zipf_exponent);
  }
  const double edges = 20.0 * static_cast<double>(num_items);
  model.stats.item_degrees.resize(num_items);
  model.stats.item_beta.resize(num_items);
  for (std::size_t i = 0; i < num_items; ++i) {
    const double p = std::pow(static_cast<double>(i + 1), -zipf_exponent) / norm;
    model.stats.item_degrees[i] = std::llround(edges * p);
    model.stats.item_beta[i] = item_weight(model.stats.item_degrees[i]);
  }
  return model;
}

std::vector<ItemIndex> sample_history(const ZipfSampler& popularity,
                                      double mean_length, Rng& rng) {
  const double p = 1.0 / std::max(mean_length, 1.0);
  std::size_t length = 1;
  while (NormalSampler::uniform(rng) >= p && length < popularity.size()) {
    ++length;
  }
  std::vector<ItemIndex> items;
  std::size_t attempts = 0;
  while (items.size() < length && attempts < 100 * length) {
    ++attempts;
    const auto i = static_cast<ItemIndex>(popularity(rng));
    if (std::find(items.begin(), items.end(), i) == items.end()) {
      items.push_back(i);
    }
  }
  std::sort(items.begin(), items.end());
  return items;
}

namespace {

std::vector<ItemIndex> pick_distinct(std::size_t block, std::size_t per_block,
                                     std::size_t count,
                                     const std::vector<ItemIndex>& avoid,
                                     Rng& rng) {
  std::vector<ItemIndex> pool;
  for (std::size_t k = 0; k < per_block; ++k) {
    const auto i = static_cast<ItemIndex>(block * per_block + k);
    if (std::find(avoid.begin(), avoid.end(), i) == avoid.end()) {
      pool.push_back(i);
    }
  }
  if (pool.size() < count) {
    throw DimensionError("block too small for the requested event counts");
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(pool[k], pool[k + uniform_index(rng, pool.size() - k)]);
  }
  pool.resize(count);
  return pool;
}

std::shared_ptr<IdMap> numeric_ids(std::size_t users, std::size_t items) {
  auto ids = std::make_shared<IdMap>();
  for (std::size_t u = 0; u < users; ++u) ids->users.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < items; ++i) ids->items.push_back("i" + std::to_string(i));
  return ids;
}

}  // namespace

BlockDataset block_dataset(const BlockOptions& o) {
  BlockDataset out;
  out.options = o;
  const std::size_t num_items = o.blocks * o.items_per_block;
  auto ids = numeric_ids(o.users, num_items);
  Rng rng = make_rng(o.seed, "synthetic/blocks");

  out.flipped.assign(o.users, 0);
  out.user_block.resize(o.users);
  for (std::size_t u = 0; u < o.users; ++u) {
    out.flipped[u] = NormalSampler::uniform(rng) < o.flip_fraction;
  }

  std::vector<Event> train;
  std::vector<Event> warm;
  std::vector<Event> test;
  Timestamp train_clock = 0;
  Timestamp warm_clock = 1'000'000;
  Timestamp test_clock = 2'000'000;
  for (std::size_t u = 0; u < o.users; ++u) {
    const auto user = static_cast<UserIndex>(u);
    const std::size_t own = u % o.blocks;
    const auto trained =
        pick_distinct(own, o.items_per_block, o.train_per_user, {}, rng);
    for (const auto i : trained) train.push_back({user, i, ++train_clock});
    if (out.flipped[u]) {
      const std::size_t next = (own + 1) % o.blocks;
      out.user_block[u] = next;
      const auto moved = pick_distinct(next, o.items_per_block,
                                       o.warm_per_flipped_user, {}, rng);
      for (const auto i : moved) warm.push_back({user, i, ++warm_clock});
      for (const auto i : pick_distinct(next, o.items_per_block,
                                        o.test_per_user, moved, rng)) {
        test.push_back({user, i, ++test_clock});
      }
    } else {
      out.user_block[u] = own;
      for (const auto i : pick_distinct(own, o.items_per_block,
                                        o.test_per_user, trained, rng)) {
        test.push_back({user, i, ++test_clock});
      }
    }
  }

  auto make = [&](std::vector<Event> events) {
    InteractionLog log;
    log.events = std::move(events);
    log.num_users = o.users;
    log.num_items = num_items;
    log.ids = ids;
    return log;
  };
  std::vector<Event> all = train;
  all.insert(all.end(), warm.begin(), warm.end());
  all.insert(all.end(), test.begin(), test.end());
  out.log = make(std::move(all));
  out.split.train_end = train_clock;
  out.split.warm_end = warm.empty() ? train_clock : warm_clock;
  out.split.train = make(std::move(train));
  out.split.warm = make(std::move(warm));
  out.split.test = make(std::move(test));
  return out;
}

InteractionLog latent_log(const LatentOptions& o) {
  Rng rng = make_rng(o.seed, "synthetic/latent");
  NormalSampler normal;
  const auto d = static_cast<Eigen::Index>(o.latent_rank);
  RowMatrix user_factors(static_cast<Eigen::Index>(o.users), d);
  RowMatrix item_factors(static_cast<Eigen::Index>(o.items), d);
  for (Eigen::Index k = 0; k < user_factors.size(); ++k)
    user_factors.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < item_factors.size(); ++k)
    item_factors.data()[k] = normal(rng);

  // Popularity ranks are shuffled so item index carries no signal.
  std::vector<ItemIndex> by_rank(o.items);
  for (std::size_t i = 0; i < o.items; ++i) by_rank[i] = static_cast<ItemIndex>(i);
  for (std::size_t k = o.items; k > 1; --k) {
    std::swap(by_rank[k - 1], by_rank[uniform_index(rng, k)]);
  }
  const ZipfSampler popularity(o.items, o.zipf_exponent);

  InteractionLog log;
  log.num_users = o.users;
  log.num_items = o.items;
  log.ids = numeric_ids(o.users, o.items);
  const double horizon = 1e8;
  for (std::size_t u = 0; u < o.users; ++u) {
    const auto candidates = sample_history(popularity, 4.0 * o.mean_history, rng);
    std::vector<std::pair<double, ItemIndex>> scored;
    for (const auto r : candidates) {
      const auto i = by_rank[r];
      const double gumbel =
          -std::log(-std::log(std::max(NormalSampler::uniform(rng), 1e-300)));
      scored.emplace_back(
          user_factors.row(static_cast<Eigen::Index>(u)).dot(item_factors.row(i)) +
              gumbel,
          i);
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t keep = std::max<std::size_t>(1, scored.size() / 4);
    for (std::size_t k = 0; k < keep; ++k) {
      const auto ts = static_cast<Timestamp>(NormalSampler::uniform(rng) * horizon);
      log.events.push_back({static_cast<UserIndex>(u), scored[k].second, ts});
    }
  }
  return log;
}

}  // namespace warmfold::synthetic
