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

#include "warmfold/foldin.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"

namespace warmfold {

namespace {

constexpr std::string_view kPlanMagic = "WFPLN1";

void require_beta(const FoldInRequest& request) {
  if (!(std::isfinite(request.beta) && request.beta > 0.0)) {
    throw ColdUserError("user " + std::to_string(request.user) +
                        " has no defined beta_u; serve it with the zero or "
                        "mean strategy");
  }
}

void require_support(const FoldInRequest& request, std::size_t num_items) {
  if (!request.values.empty() && request.values.size() != request.items.size()) {
    throw DimensionError("fold-in request values do not match its items");
  }
  for (const auto i : request.items) {
    if (i >= num_items) {
      throw DimensionError("fold-in item " + std::to_string(i) +
                           " outside catalogue of " + std::to_string(num_items));
    }
  }
}

void require_ultragcn(const EmbeddingModel& model, std::string_view what) {
  if (model.kind != ModelKind::kUltraGcn) {
    throw DataError(std::string(what) + " requires an UltraGCN model");
  }
}

Matrix column_major(const RowMatrix& m) { return m; }

}  // namespace

FoldInRequest FoldInRequest::from(const MergedHistory& history) {
  FoldInRequest r;
  r.user = history.user;
  r.items = history.items;
  r.beta = history.beta;
  return r;
}

FoldInPlan build_plan(const EmbeddingModel& model, double rank_tol) {
  require_ultragcn(model, "build_plan");
  const PseudoInverse pinv = pseudo_inverse(column_major(model.items), rank_tol);
  if (pinv.is_zero()) {
    throw PlanBuildError("item embedding matrix has rank 0");
  }
  FoldInPlan plan;
  plan.v_pinv = pinv.materialized;
  plan.inv_item_beta.resize(static_cast<Eigen::Index>(model.num_items()));
  for (std::size_t i = 0; i < model.num_items(); ++i) {
    plan.inv_item_beta(static_cast<Eigen::Index>(i)) =
        std::sqrt(static_cast<double>(model.stats.item_degrees[i]) + 1.0);
  }
  plan.rank = model.rank();
  plan.pinv_rank = pinv.rank();
  plan.built_from = item_side_fingerprint(model);
  return plan;
}

void check_plan(const FoldInPlan& plan, const EmbeddingModel& model) {
  const auto fp = item_side_fingerprint(model);
  if (plan.built_from != fp) {
    throw StalePlanError("fold-in plan was built for model " +
                         std::to_string(plan.built_from) +
                         " but the current model is " + std::to_string(fp));
  }
}

void save_plan(const std::filesystem::path& path, const FoldInPlan& plan) {
  std::vector<char> bytes(kPlanMagic.begin(), kPlanMagic.end());
  auto put = [&bytes](const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    bytes.insert(bytes.end(), c, c + n);
  };
  const std::uint64_t header[4] = {
      plan.built_from, static_cast<std::uint64_t>(plan.v_pinv.rows()),
      static_cast<std::uint64_t>(plan.v_pinv.cols()),
      static_cast<std::uint64_t>(plan.pinv_rank)};
  put(header, sizeof(header));
  put(plan.inv_item_beta.data(),
      static_cast<std::size_t>(plan.inv_item_beta.size()) * sizeof(double));
  put(plan.v_pinv.data(),
      static_cast<std::size_t>(plan.v_pinv.size()) * sizeof(double));
  Fnv1a h;
  h.update(bytes.data(), bytes.size());
  const auto checksum = h.digest();
  put(&checksum, sizeof(checksum));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write plan '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FoldInPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open plan '" + path.string() + "'");
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>()};
  const std::size_t fixed = kPlanMagic.size() + 4 * 8;
  if (bytes.size() < fixed + 8 ||
      std::string_view(bytes.data(), kPlanMagic.size()) != kPlanMagic) {
    throw CorruptFileError("bad magic: not a warmfold plan file");
  }
  std::uint64_t header[4];
  std::memcpy(header, bytes.data() + kPlanMagic.size(), sizeof(header));
  const auto d = header[1];
  const auto n = header[2];
  if (bytes.size() != fixed + (n + d * n) * 8 + 8) {
    throw CorruptFileError("plan file size does not match its header");
  }
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  Fnv1a h;
  h.update(bytes.data(), bytes.size() - 8);
  if (h.digest() != stored) throw ChecksumMismatchError("plan checksum mismatch");

  FoldInPlan plan;
  plan.built_from = header[0];
  plan.rank = d;
  plan.pinv_rank = header[3];
  plan.inv_item_beta.resize(static_cast<Eigen::Index>(n));
  plan.v_pinv.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  const char* p = bytes.data() + fixed;
  std::memcpy(plan.inv_item_beta.data(), p, n * 8);
  std::memcpy(plan.v_pinv.data(), p + n * 8, d * n * 8);
  return plan;
}

Vector linear_foldin(const FoldInPlan& plan, const FoldInRequest& request,
                     FoldInWorkspace& workspace) {
  require_beta(request);
  const auto n = static_cast<std::size_t>(plan.inv_item_beta.size());
  require_support(request, n);
  // c = a_u^T B_I^{-1}, nonzero only on the support of a_u.
  Vector& c = workspace.dense(n);
  for (std::size_t k = 0; k < request.items.size(); ++k) {
    const auto i = request.items[k];
    c(i) = request.value(k) * plan.inv_item_beta(i);
  }
  Vector e(plan.v_pinv.rows());
  e.noalias() = plan.v_pinv * c;
  for (const auto i : request.items) c(i) = 0.0;
  e *= 1.0 / request.beta;
  return e;
}

Vector linear_foldin(const FoldInPlan& plan, const FoldInRequest& request) {
  FoldInWorkspace workspace;
  return linear_foldin(plan, request, workspace);
}

WlsSystem build_wls_system(const EmbeddingModel& model) {
  require_ultragcn(model, "exact_wls_foldin");
  const auto beta = Eigen::Map<const Vector>(
      model.stats.item_beta.data(),
      static_cast<Eigen::Index>(model.stats.item_beta.size()));
  const RowMatrix weighted = beta.asDiagonal() * model.items;
  WlsSystem system;
  system.gram = weighted.transpose() * weighted;
  system.factor.compute(system.gram);
  if (system.factor.info() != Eigen::Success ||
      system.factor.rcond() < 1e-14) {
    const auto d = static_cast<double>(system.gram.rows());
    system.ridge = 1e-10 * std::max(system.gram.trace(), 1e-300) / d;
    system.factor.compute(system.gram +
                          system.ridge * Matrix::Identity(system.gram.rows(),
                                                          system.gram.cols()));
    system.regularized = true;
  }
  return system;
}

FlaggedEmbedding exact_wls_foldin(const EmbeddingModel& model,
                                  const WlsSystem& system,
                                  const FoldInRequest& request) {
  require_ultragcn(model, "exact_wls_foldin");
  require_beta(request);
  require_support(request, model.num_items());
  // (V^T B_I^2 V) e = (1/beta_u) V^T B_I a_u
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t k = 0; k < request.items.size(); ++k) {
    const auto i = request.items[k];
    rhs.noalias() += (request.value(k) * model.stats.item_beta[i]) *
                     model.items.row(i).transpose();
  }
  rhs /= request.beta;
  return {system.factor.solve(rhs), system.regularized};
}

FlaggedEmbedding exact_wls_foldin(const EmbeddingModel& model,
                                  const FoldInRequest& request) {
  return exact_wls_foldin(model, build_wls_system(model), request);
}

FlaggedEmbedding svd_foldin(const EmbeddingModel& model,
                            const FoldInRequest& request, double rank_tol) {
  if (model.kind != ModelKind::kPureSvd) {
    throw DataError("svd_foldin requires a PureSVD model");
  }
  require_support(request, model.num_items());
  Vector e = Vector::Zero(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t k = 0; k < request.items.size(); ++k) {
    e.noalias() += request.value(k) * model.items.row(request.items[k]).transpose();
  }
  const double cutoff = rank_tol * (model.sigma.size() ? model.sigma.maxCoeff() : 0.0);
  bool truncated = false;
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    if (model.sigma(k) > cutoff && model.sigma(k) > 0.0) {
      e(k) /= model.sigma(k);
    } else {
      e(k) = 0.0;
      truncated = true;
    }
  }
  return {e, truncated};
}

SgdInit parse_sgd_init(std::string_view tag) {
  if (tag == "zero") return SgdInit::kZero;
  if (tag == "previous") return SgdInit::kPrevious;
  if (tag == "mean") return SgdInit::kMean;
  throw DataError("unknown sgd init '" + std::string(tag) + "'");
}

std::string_view to_string(SgdInit init) {
  switch (init) {
    case SgdInit::kZero:
      return "zero";
    case SgdInit::kPrevious:
      return "previous";
    case SgdInit::kMean:
      return "mean";
  }
  return "previous";
}

void validate(const SgdFoldInConfig& c) {
  if (c.steps < 1 || !(c.learning_rate > 0.0) || !(c.mix >= 0.0 && c.mix <= 1.0)) {
    throw DataError("sgd config: steps >= 1, learning rate > 0, mix in [0, 1]");
  }
}

double foldin_objective(const EmbeddingModel& model,
                        const FoldInRequest& request, const Vector& e) {
  require_ultragcn(model, "foldin_objective");
  require_support(request, model.num_items());
  Vector r = model.items * e;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) *= request.beta * model.stats.item_beta[static_cast<std::size_t>(i)];
  }
  for (std::size_t k = 0; k < request.items.size(); ++k) {
    r(request.items[k]) -= request.value(k);
  }
  return r.squaredNorm();
}

Vector foldin_gradient(const EmbeddingModel& model,
                       const FoldInRequest& request, const Vector& e,
                       FoldInWorkspace& workspace) {
  const auto n = model.num_items();
  Vector& t = workspace.dense(n);
  t.noalias() = model.items * e;
  const double bu = request.beta;
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = model.stats.item_beta[i];
    t(static_cast<Eigen::Index>(i)) *= bu * bi * bi;
  }
  for (std::size_t k = 0; k < request.items.size(); ++k) {
    const auto i = request.items[k];
    t(i) -= model.stats.item_beta[i] * request.value(k);
  }
  Vector grad(static_cast<Eigen::Index>(model.rank()));
  grad.noalias() = model.items.transpose() * t;
  grad *= 2.0 * bu;
  t.setZero();
  return grad;
}

Vector zero_foldin(const EmbeddingModel& model, UserIndex user) {
  if (user >= model.num_users()) {
    throw DimensionError("user " + std::to_string(user) + " out of range");
  }
  if (model.stats.user_degrees[user] == 0) {
    return Vector::Zero(static_cast<Eigen::Index>(model.rank()));
  }
  return model.users.row(user).transpose();
}

Vector mean_foldin(const EmbeddingModel& model) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(model.rank()));
  std::size_t count = 0;
  for (std::size_t u = 0; u < model.num_users(); ++u) {
    if (model.stats.user_degrees[u] == 0) continue;
    sum.noalias() += model.users.row(static_cast<Eigen::Index>(u)).transpose();
    ++count;
  }
  if (count > 0) sum /= static_cast<double>(count);
  return sum;
}

Vector sgd_foldin(const EmbeddingModel& model, const FoldInRequest& request,
                  const SgdFoldInConfig& config, const Vector& mean_user,
                  FoldInWorkspace& workspace) {
  require_ultragcn(model, "sgd_foldin");
  require_beta(request);
  require_support(request, model.num_items());
  validate(config);
  Vector e;
  switch (config.init) {
    case SgdInit::kZero:
      e = Vector::Zero(static_cast<Eigen::Index>(model.rank()));
      break;
    case SgdInit::kPrevious:
      e = zero_foldin(model, request.user);
      break;
    case SgdInit::kMean:
      e = mean_user;
      break;
  }
  for (int step = 1; step <= config.steps; ++step) {
    e.noalias() -= config.learning_rate *
                   foldin_gradient(model, request, e, workspace);
    const double norm = e.norm();
    if (!std::isfinite(norm) || norm > 1e6) {
      throw FoldInDivergedError(step, "embedding norm " + std::to_string(norm));
    }
  }
  return config.mix * mean_user + (1.0 - config.mix) * e;
}

Vector sgd_foldin(const EmbeddingModel& model, const FoldInRequest& request,
                  const SgdFoldInConfig& config) {
  FoldInWorkspace workspace;
  return sgd_foldin(model, request, config, mean_foldin(model), workspace);
}

EmbeddingModel full_retrain(const InteractionLog& train,
                            const InteractionLog& warm,
                            const TrainConfig& config,
                            TrainingReport* report) {
  std::vector<Event> all = train.events;
  all.insert(all.end(), warm.events.begin(), warm.events.end());
  const auto matrix = build_matrix(all, train.num_users, train.num_items);
  EmbeddingModel model =
      train_ultragcn(matrix, graph_stats(matrix), config, report);
  clear_untrained_rows(model);
  return model;
}

Strategy parse_strategy(std::string_view tag) {
  if (tag == "zero") return Strategy::kZero;
  if (tag == "mean") return Strategy::kMean;
  if (tag == "sgd") return Strategy::kSgd;
  if (tag == "linear") return Strategy::kLinear;
  if (tag == "wls") return Strategy::kExactWls;
  if (tag == "svd") return Strategy::kSvd;
  if (tag == "full") return Strategy::kFull;
  throw DataError("unknown fold-in strategy '" + std::string(tag) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kZero:
      return "zero";
    case Strategy::kMean:
      return "mean";
    case Strategy::kSgd:
      return "sgd";
    case Strategy::kLinear:
      return "linear";
    case Strategy::kExactWls:
      return "wls";
    case Strategy::kSvd:
      return "svd";
    case Strategy::kFull:
      return "full";
  }
  return "zero";
}

bool applies_to(Strategy strategy, ModelKind kind) {
  switch (strategy) {
    case Strategy::kZero:
    case Strategy::kMean:
      return true;
    case Strategy::kSvd:
      return kind == ModelKind::kPureSvd;
    default:
      return kind == ModelKind::kUltraGcn;
  }
}

FoldInEngine::FoldInEngine(const EmbeddingModel& model, Strategy strategy,
                           const SgdFoldInConfig& sgd,
                           std::optional<FoldInPlan> plan)
    : model_(model), strategy_(strategy), sgd_(sgd), plan_(std::move(plan)) {
  if (!applies_to(strategy, model.kind) || strategy == Strategy::kFull) {
    throw DataError("strategy '" + std::string(to_string(strategy)) +
                    "' does not apply per user to a " +
                    std::string(to_string(model.kind)) + " model");
  }
  switch (strategy) {
    case Strategy::kLinear:
      if (plan_) {
        check_plan(*plan_, model);
      } else {
        plan_ = build_plan(model);
      }
      break;
    case Strategy::kExactWls:
      wls_ = build_wls_system(model);
      break;
    case Strategy::kSgd:
      validate(sgd_);
      mean_ = mean_foldin(model);
      break;
    case Strategy::kMean:
      mean_ = mean_foldin(model);
      break;
    default:
      break;
  }
}

Vector FoldInEngine::fold_in(const FoldInRequest& request) {
  switch (strategy_) {
    case Strategy::kZero:
      return zero_foldin(model_, request.user);
    case Strategy::kMean:
      return mean_;
    case Strategy::kLinear:
      return linear_foldin(*plan_, request, workspace_);
    case Strategy::kExactWls: {
      auto r = exact_wls_foldin(model_, *wls_, request);
      flagged_ += r.flagged;
      return std::move(r.embedding);
    }
    case Strategy::kSvd: {
      auto r = svd_foldin(model_, request);
      flagged_ += r.flagged;
      return std::move(r.embedding);
    }
    case Strategy::kSgd:
      return sgd_foldin(model_, request, sgd_, mean_, workspace_);
    case Strategy::kFull:
      break;
  }
  throw DataError("full retrain has no per-user fold-in");
}

}  // namespace warmfold
