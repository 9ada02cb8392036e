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

#include "warmfold/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"

namespace warmfold {

namespace {

// sigma(-x), evaluated without overflow.
double sigmoid_neg(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double checked_user_beta(const GraphStats& stats, UserIndex u) {
  if (!stats.user_beta_defined(u)) {
    throw ColdUserError("user " + std::to_string(u) +
                        " has zero degree; beta_u is undefined");
  }
  return stats.user_beta[u];
}

// Adds the contribution of one positive and its negatives to the gradient
// buffers and returns the loss of those pairs.
double accumulate_sample(const RowMatrix& users, const RowMatrix& items,
                         const GraphStats& stats, UserIndex u, ItemIndex i,
                         std::span<const ItemIndex> negatives,
                         const LossWeights& w, RowMatrix& user_grad,
                         RowMatrix& item_grad) {
  const double bu = checked_user_beta(stats, u);
  const double bi = stats.item_beta[i];
  const auto eu = users.row(u);
  const auto ei = items.row(i);
  const double xi = eu.dot(ei);

  double loss = 0.0;
  double coef_pos = 0.0;  // accumulated d loss / d x_i
  auto gu = user_grad.row(u);
  for (const auto j : negatives) {
    const auto ej = items.row(j);
    const double bj = stats.item_beta[j];
    const double xj = eu.dot(ej);
    double coef_neg = 0.0;  // d loss / d x_j
    if (w.weighted != 0.0) {
      const double z = bu * (bi * xi - bj * xj);
      loss -= w.weighted * log_sigmoid(z);
      const double g = -w.weighted * sigmoid_neg(z);
      coef_pos += g * bu * bi;
      coef_neg -= g * bu * bj;
    }
    if (w.plain != 0.0) {
      const double z = xi - xj;
      loss -= w.plain * log_sigmoid(z);
      const double g = -w.plain * sigmoid_neg(z);
      coef_pos += g;
      coef_neg -= g;
    }
    gu.noalias() += coef_neg * ej;
    item_grad.row(j).noalias() += coef_neg * eu;
  }
  gu.noalias() += coef_pos * ei;
  item_grad.row(i).noalias() += coef_pos * eu;
  return loss;
}

class LazyAdam {
 public:
  LazyAdam(Eigen::Index rows, Eigen::Index cols, double lr)
      : m_(RowMatrix::Zero(rows, cols)),
        v_(RowMatrix::Zero(rows, cols)),
        lr_(lr) {}

  // Updates the listed rows of `param` and clears the matching gradient rows.
  void step(RowMatrix& param, RowMatrix& grad,
            std::span<const std::uint32_t> rows, std::int64_t t) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    const double td = static_cast<double>(t);
    const double rate =
        lr_ * std::sqrt(1.0 - std::pow(b2, td)) / (1.0 - std::pow(b1, td));
    for (const auto r : rows) {
      auto g = grad.row(r);
      auto m = m_.row(r);
      auto v = v_.row(r);
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
      param.row(r).array() -= rate * m.array() / (v.array().sqrt() + eps);
      g.setZero();
    }
  }

 private:
  RowMatrix m_;
  RowMatrix v_;
  double lr_;
};

class RowTracker {
 public:
  explicit RowTracker(std::size_t n) : seen_(n, 0) {}
  void touch(std::uint32_t r) {
    if (!seen_[r]) {
      seen_[r] = 1;
      rows_.push_back(r);
    }
  }
  std::span<const std::uint32_t> rows() const { return rows_; }
  void clear() {
    for (const auto r : rows_) seen_[r] = 0;
    rows_.clear();
  }

 private:
  std::vector<char> seen_;
  std::vector<std::uint32_t> rows_;
};

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kPureSvd ? "puresvd" : "ultragcn";
}

ModelKind parse_model_kind(std::string_view tag) {
  if (tag == "ultragcn") return ModelKind::kUltraGcn;
  if (tag == "puresvd") return ModelKind::kPureSvd;
  throw DataError("unknown model kind '" + std::string(tag) + "'");
}

double log_sigmoid(double x) {
  // -softplus(-x)
  return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
}

std::uint64_t item_side_fingerprint(const EmbeddingModel& model) {
  Fnv1a h;
  h.update_value(static_cast<std::uint8_t>(model.kind));
  h.update_value(static_cast<std::uint64_t>(model.num_items()));
  h.update_value(static_cast<std::uint64_t>(model.rank()));
  h.update(model.items.data(),
           static_cast<std::size_t>(model.items.size()) * sizeof(double));
  h.update(model.sigma.data(),
           static_cast<std::size_t>(model.sigma.size()) * sizeof(double));
  h.update_span(std::span<const double>(model.stats.item_beta));
  h.update_span(std::span<const std::int64_t>(model.stats.item_degrees));
  return h.digest();
}

void clear_untrained_rows(EmbeddingModel& model) {
  for (std::size_t u = 0; u < model.num_users(); ++u) {
    if (model.stats.user_degrees[u] == 0) {
      model.users.row(static_cast<Eigen::Index>(u)).setZero();
    }
  }
  for (std::size_t i = 0; i < model.num_items(); ++i) {
    if (model.stats.item_degrees[i] == 0) {
      model.items.row(static_cast<Eigen::Index>(i)).setZero();
    }
  }
}

double score(const EmbeddingModel& model, UserIndex u, ItemIndex i) {
  if (u >= model.num_users() || i >= model.num_items()) {
    throw DimensionError("score: (" + std::to_string(u) + ", " +
                         std::to_string(i) + ") out of range");
  }
  if (model.kind == ModelKind::kPureSvd) {
    return model.users.row(u).dot(model.items.row(i).cwiseProduct(
        model.sigma.transpose()));
  }
  const double bu = checked_user_beta(model.stats, u);
  return bu * model.stats.item_beta[i] *
         model.users.row(u).dot(model.items.row(i));
}

Vector item_scores(const EmbeddingModel& model, const Vector& user_embedding) {
  if (static_cast<std::size_t>(user_embedding.size()) != model.rank()) {
    throw DimensionError("embedding length " +
                         std::to_string(user_embedding.size()) +
                         " does not match rank " + std::to_string(model.rank()));
  }
  if (model.kind == ModelKind::kPureSvd) {
    return model.items * user_embedding.cwiseProduct(model.sigma);
  }
  Vector s = model.items * user_embedding;
  s.array() *= Eigen::Map<const Vector>(model.stats.item_beta.data(),
                                        static_cast<Eigen::Index>(
                                            model.stats.item_beta.size()))
                   .array();
  return s;
}

Vector score_all(const EmbeddingModel& model, UserIndex u) {
  if (u >= model.num_users()) {
    throw DimensionError("score_all: user " + std::to_string(u) +
                         " out of range");
  }
  const Vector eu = model.users.row(u).transpose();
  if (model.kind == ModelKind::kPureSvd) return item_scores(model, eu);
  const double bu = checked_user_beta(model.stats, u);
  return bu * item_scores(model, eu);
}

void validate(const TrainConfig& c) {
  if (c.rank < 1 || c.negatives_per_positive < 1 || c.epochs < 1 ||
      c.batch_size < 1 || !(c.learning_rate > 0.0) || !(c.init_scale > 0.0) ||
      !(c.lambda >= 0.0)) {
    throw DataError(
        "train config: rank, negatives, epochs, batch size, learning rate and "
        "init scale must be positive and lambda non-negative");
  }
}

EmbeddingModel train_ultragcn(const InteractionMatrix& matrix,
                              const GraphStats& stats,
                              const TrainConfig& config,
                              TrainingReport* report) {
  validate(config);
  if (matrix.nnz() == 0) throw EmptyInputError("training matrix is empty");
  if (stats.user_degrees.size() != matrix.rows() ||
      stats.item_degrees.size() != matrix.cols()) {
    throw DimensionError("graph stats do not match the training matrix");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto m = static_cast<Eigen::Index>(matrix.rows());
  const auto n = static_cast<Eigen::Index>(matrix.cols());
  const auto d = static_cast<Eigen::Index>(config.rank);

  EmbeddingModel model;
  model.kind = ModelKind::kUltraGcn;
  model.stats = stats;
  model.lambda = config.lambda;
  model.users.resize(m, d);
  model.items.resize(n, d);
  {
    Rng rng = make_rng(config.seed, "ultragcn/init");
    NormalSampler normal;
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index k = 0; k < d; ++k)
        model.users(r, k) = config.init_scale * normal(rng);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index k = 0; k < d; ++k)
        model.items(r, k) = config.init_scale * normal(rng);
  }

  std::vector<std::pair<UserIndex, ItemIndex>> positives;
  positives.reserve(matrix.nnz());
  for (std::size_t u = 0; u < matrix.rows(); ++u) {
    const auto row = matrix.row(static_cast<UserIndex>(u));
    if (row.size() >= matrix.cols()) continue;  // no negatives exist
    for (const auto i : row) positives.emplace_back(static_cast<UserIndex>(u), i);
  }
  if (positives.empty()) {
    throw EmptyInputError("no user has a non-interacted item to contrast with");
  }

  const LossWeights weights{1.0, config.lambda};
  RowMatrix user_grad = RowMatrix::Zero(m, d);
  RowMatrix item_grad = RowMatrix::Zero(n, d);
  LazyAdam user_opt(m, d, config.learning_rate);
  LazyAdam item_opt(n, d, config.learning_rate);
  RowTracker user_rows(matrix.rows());
  RowTracker item_rows(matrix.cols());
  std::vector<ItemIndex> negatives(config.negatives_per_positive);

  Rng rng = make_rng(config.seed, "ultragcn/sampling");
  std::int64_t step = 0;
  if (report) report->epoch_loss.clear();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t k = positives.size(); k > 1; --k) {
      std::swap(positives[k - 1], positives[uniform_index(rng, k)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < positives.size();
         begin += config.batch_size) {
      const std::size_t end =
          std::min(begin + config.batch_size, positives.size());
      for (std::size_t p = begin; p < end; ++p) {
        const auto [u, i] = positives[p];
        for (auto& j : negatives) {
          do {
            j = static_cast<ItemIndex>(uniform_index(rng, matrix.cols()));
          } while (matrix.contains(u, j));
          item_rows.touch(j);
        }
        epoch_loss += accumulate_sample(model.users, model.items, stats, u, i,
                                        negatives, weights, user_grad,
                                        item_grad);
        user_rows.touch(u);
        item_rows.touch(i);
      }
      ++step;
      user_opt.step(model.users, user_grad, user_rows.rows(), step);
      item_opt.step(model.items, item_grad, item_rows.rows(), step);
      user_rows.clear();
      item_rows.clear();
    }
    epoch_loss /= static_cast<double>(positives.size() * negatives.size());
    if (!std::isfinite(epoch_loss) || !model.users.allFinite() ||
        !model.items.allFinite()) {
      throw TrainingDivergedError(epoch, "non-finite loss or embeddings");
    }
    if (report) report->epoch_loss.push_back(epoch_loss);
  }
  if (report) {
    report->seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  }
  return model;
}

EmbeddingModel train_puresvd(const InteractionMatrix& matrix, std::size_t rank,
                             std::uint64_t seed) {
  const TruncatedSvd svd = truncated_svd(matrix, rank, seed);
  EmbeddingModel model;
  model.kind = ModelKind::kPureSvd;
  model.users = svd.left;
  model.items = svd.right;
  model.sigma = svd.singular_values;
  model.stats = graph_stats(matrix);
  return model;
}

LossGradient loss_and_gradient(const EmbeddingModel& model,
                               std::span<const TrainingSample> batch,
                               const LossWeights& weights) {
  if (model.kind != ModelKind::kUltraGcn) {
    throw DataError("loss_and_gradient requires an UltraGCN model");
  }
  LossGradient out;
  out.user_grad = RowMatrix::Zero(model.users.rows(), model.users.cols());
  out.item_grad = RowMatrix::Zero(model.items.rows(), model.items.cols());
  for (const auto& s : batch) {
    if (s.user >= model.num_users() || s.positive >= model.num_items()) {
      throw DimensionError("training sample out of range");
    }
    if (s.negatives.empty()) throw DataError("training sample has no negatives");
    for (const auto j : s.negatives) {
      if (j >= model.num_items()) throw DimensionError("negative out of range");
    }
    out.loss += accumulate_sample(model.users, model.items, model.stats,
                                  s.user, s.positive, s.negatives, weights,
                                  out.user_grad, out.item_grad);
  }
  return out;
}

}  // namespace warmfold
