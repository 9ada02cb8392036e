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

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "warmfold/data.hpp"
#include "warmfold/linalg.hpp"
#include "warmfold/model.hpp"
#include "warmfold/random.hpp"

namespace warmfold::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                       double scale = 1.0) {
  NormalSampler normal;
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = scale * normal(rng);
  return m;
}

inline double relative_error(const Matrix& got, const Matrix& want) {
  const double denom = std::max(want.norm(), 1e-300);
  return (got - want).norm() / denom;
}

inline InteractionLog make_log(const std::vector<Event>& events,
                               std::size_t users, std::size_t items) {
  InteractionLog log;
  log.events = events;
  log.num_users = users;
  log.num_items = items;
  return log;
}

// Bernoulli(density) binary matrix; every row and column gets one entry so
// degrees are positive.
inline InteractionMatrix random_interactions(std::size_t m, std::size_t n,
                                             double density, Rng& rng) {
  std::vector<Event> events;
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t i = 0; i < n; ++i) {
      if (NormalSampler::uniform(rng) < density) {
        events.push_back({static_cast<UserIndex>(u), static_cast<ItemIndex>(i), 0});
      }
    }
  }
  for (std::size_t u = 0; u < m; ++u) {
    events.push_back({static_cast<UserIndex>(u),
                      static_cast<ItemIndex>(uniform_index(rng, n)), 0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    events.push_back({static_cast<UserIndex>(uniform_index(rng, m)),
                      static_cast<ItemIndex>(i), 0});
  }
  return build_matrix(events, m, n);
}

// UltraGCN-shaped model with Gaussian embeddings and degree-derived weights
// taken from a random interaction matrix.
inline EmbeddingModel random_ultragcn(std::size_t m, std::size_t n,
                                      std::size_t d, Rng& rng,
                                      double scale = 1.0,
                                      double density = 0.1) {
  EmbeddingModel model;
  model.kind = ModelKind::kUltraGcn;
  model.users = gaussian(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d), rng, scale);
  model.items = gaussian(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), rng, scale);
  model.stats = graph_stats(random_interactions(m, n, density, rng));
  return model;
}

// Distinct sorted items.
inline std::vector<ItemIndex> random_support(std::size_t n, std::size_t count,
                                             Rng& rng) {
  std::vector<ItemIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<ItemIndex>(i);
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(all[k], all[k + uniform_index(rng, n - k)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("warmfold-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace warmfold::testing
