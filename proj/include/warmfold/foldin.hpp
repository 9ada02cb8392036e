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

#include <Eigen/Cholesky>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "warmfold/data.hpp"
#include "warmfold/linalg.hpp"
#include "warmfold/model.hpp"

namespace warmfold {

// Warm-user embedding updates against a frozen item side.
//
// For the UltraGCN-style model the user u with interaction vector a_u and
// degree weight beta_u is refit from
//
//   min_e || a_u - beta_u B_I V e ||^2,             B_I = diag(beta_i).
//
// `linear_foldin` evaluates the closed form e = (1/beta_u) V+ B_I^{-1} a_u
// with V+ and B_I^{-1} precomputed in a FoldInPlan, so one update costs a
// sparse scaling plus a single d x N matrix-vector product. That closed form
// is the exact minimizer of the reweighted residual
// || B_I^{-1} a_u - beta_u V e ||; it coincides with the objective above only
// when B_I is a multiple of the identity. `exact_wls_foldin` solves the
// objective above through its normal equations and `sgd_foldin` runs
// gradient descent on it.

struct FoldInRequest {
  UserIndex user = 0;
  std::vector<ItemIndex> items;  // support of a_u, ascending
  std::vector<double> values;    // a_u entries on the support; empty = all 1
  double beta = 0.0;             // beta_u recomputed from the merged degree

  static FoldInRequest from(const MergedHistory& history);
  double value(std::size_t k) const { return values.empty() ? 1.0 : values[k]; }
};

struct FoldInPlan {
  Matrix v_pinv;         // d x N
  Vector inv_item_beta;  // N, sqrt(d_i + 1)
  std::size_t rank = 0;
  std::size_t pinv_rank = 0;
  std::uint64_t built_from = 0;  // item_side_fingerprint of the model
};

FoldInPlan build_plan(const EmbeddingModel& model,
                      double rank_tol = kDefaultRankTol);

// Throws StalePlanError when the plan was built for another item side.
void check_plan(const FoldInPlan& plan, const EmbeddingModel& model);

void save_plan(const std::filesystem::path& path, const FoldInPlan& plan);
FoldInPlan load_plan(const std::filesystem::path& path);

// Reusable length-N scratch vector; kept all-zero between calls.
class FoldInWorkspace {
 public:
  Vector& dense(std::size_t n) {
    if (static_cast<std::size_t>(buffer_.size()) != n) {
      buffer_ = Vector::Zero(static_cast<Eigen::Index>(n));
    }
    return buffer_;
  }

 private:
  Vector buffer_;
};

Vector linear_foldin(const FoldInPlan& plan, const FoldInRequest& request,
                     FoldInWorkspace& workspace);
Vector linear_foldin(const FoldInPlan& plan, const FoldInRequest& request);

// Gram matrix V^T B_I^2 V and its factorization, shared across users.
struct WlsSystem {
  Matrix gram;
  Eigen::LLT<Matrix> factor;
  bool regularized = false;
  double ridge = 0.0;
};

WlsSystem build_wls_system(const EmbeddingModel& model);

struct FlaggedEmbedding {
  Vector embedding;
  bool flagged = false;  // regularized solve / truncated spectrum
};

FlaggedEmbedding exact_wls_foldin(const EmbeddingModel& model,
                                  const WlsSystem& system,
                                  const FoldInRequest& request);
FlaggedEmbedding exact_wls_foldin(const EmbeddingModel& model,
                                  const FoldInRequest& request);

// e = (a_u^T V) Sigma^{-1}; singular values at or below rank_tol * s_max are
// treated as zero and the result is flagged.
FlaggedEmbedding svd_foldin(const EmbeddingModel& model,
                            const FoldInRequest& request,
                            double rank_tol = kDefaultRankTol);

enum class SgdInit { kZero, kPrevious, kMean };

SgdInit parse_sgd_init(std::string_view tag);
std::string_view to_string(SgdInit init);

struct SgdFoldInConfig {
  int steps = 50;
  double learning_rate = 1e-2;
  double mix = 0.1;
  SgdInit init = SgdInit::kPrevious;
};

void validate(const SgdFoldInConfig& config);

// || a_u - beta_u B_I V e ||^2 and its gradient
// 2 beta_u V^T (B_I (beta_u B_I (V e) - a_u)).
double foldin_objective(const EmbeddingModel& model,
                        const FoldInRequest& request, const Vector& e);
Vector foldin_gradient(const EmbeddingModel& model,
                       const FoldInRequest& request, const Vector& e,
                       FoldInWorkspace& workspace);

// Runs `steps` gradient steps from the configured start, then blends with the
// mean train-user embedding: e <- mix * e_mean + (1 - mix) * e.
Vector sgd_foldin(const EmbeddingModel& model, const FoldInRequest& request,
                  const SgdFoldInConfig& config, const Vector& mean_user,
                  FoldInWorkspace& workspace);
Vector sgd_foldin(const EmbeddingModel& model, const FoldInRequest& request,
                  const SgdFoldInConfig& config);

// The user's stored embedding (zero for users without training history).
Vector zero_foldin(const EmbeddingModel& model, UserIndex user);
// Mean embedding over users with training history.
Vector mean_foldin(const EmbeddingModel& model);

// Retrains from scratch on train + warm with fresh graph statistics.
EmbeddingModel full_retrain(const InteractionLog& train,
                            const InteractionLog& warm,
                            const TrainConfig& config,
                            TrainingReport* report = nullptr);

enum class Strategy { kZero, kMean, kSgd, kLinear, kExactWls, kSvd, kFull };

Strategy parse_strategy(std::string_view tag);
std::string_view to_string(Strategy strategy);
bool applies_to(Strategy strategy, ModelKind kind);

// Per-user dispatcher holding whatever a strategy precomputes (plan, Gram
// factorization, mean embedding). Construction cost is the "plan build" time
// and is reported separately from per-user cost.
class FoldInEngine {
 public:
  FoldInEngine(const EmbeddingModel& model, Strategy strategy,
               const SgdFoldInConfig& sgd = {},
               std::optional<FoldInPlan> plan = std::nullopt);

  Strategy strategy() const { return strategy_; }
  const FoldInPlan* plan() const { return plan_ ? &*plan_ : nullptr; }

  // Throws ColdUserError for beta-weighted strategies when the request has
  // no defined beta_u.
  Vector fold_in(const FoldInRequest& request);

  std::size_t flagged() const { return flagged_; }

 private:
  const EmbeddingModel& model_;
  Strategy strategy_;
  SgdFoldInConfig sgd_;
  std::optional<FoldInPlan> plan_;
  std::optional<WlsSystem> wls_;
  Vector mean_;
  FoldInWorkspace workspace_;
  std::size_t flagged_ = 0;
};

}  // namespace warmfold
