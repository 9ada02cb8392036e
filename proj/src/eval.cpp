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

#include "warmfold/eval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <new>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"
#include "warmfold/synthetic.hpp"

namespace warmfold {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() -
                                                              start)
      .count();
}

bool contains_sorted(std::span<const ItemIndex> items, ItemIndex i) {
  return std::binary_search(items.begin(), items.end(), i);
}

ItemList sorted_union(std::span<const ItemIndex> a,
                      std::span<const ItemIndex> b) {
  ItemList out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

double discount(std::size_t rank) {  // rank is 1-based
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

std::string format_fixed(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

// Bytes the scaling benchmark needs for one catalogue size: V, the QR
// workspace, the left factor and the materialized pseudo-inverse.
std::size_t scaling_footprint(std::size_t n, std::size_t d) {
  return n * d * sizeof(double) * 5 + n * sizeof(double) * 4;
}

std::size_t available_memory() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  std::size_t kb = 0;
  std::string unit;
  while (in >> key >> kb >> unit) {
    if (key == "MemAvailable:") return kb * 1024;
  }
  return std::numeric_limits<std::size_t>::max();
}

}  // namespace

ItemList topk(const Vector& scores, std::size_t k,
              std::span<const ItemIndex> excluded) {
  const auto n = static_cast<std::size_t>(scores.size());
  ItemList candidates;
  candidates.reserve(n);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (cursor < excluded.size() && excluded[cursor] < i) ++cursor;
    if (cursor < excluded.size() && excluded[cursor] == i) continue;
    candidates.push_back(static_cast<ItemIndex>(i));
  }
  if (k < 1 || k > candidates.size()) {
    throw DimensionError("top-" + std::to_string(k) + " requested but only " +
                         std::to_string(candidates.size()) +
                         " candidates remain");
  }
  auto better = [&scores](ItemIndex a, ItemIndex b) {
    const double sa = scores(a);
    const double sb = scores(b);
    return sa > sb || (sa == sb && a < b);
  };
  auto kth = candidates.begin() + static_cast<std::ptrdiff_t>(k);
  if (k < candidates.size()) {
    std::nth_element(candidates.begin(), kth - 1, candidates.end(), better);
  }
  std::sort(candidates.begin(), kth, better);
  candidates.resize(k);
  return candidates;
}

ItemList topk(const EmbeddingModel& model, UserIndex user, std::size_t k,
              std::span<const ItemIndex> excluded) {
  return topk(score_all(model, user), k, excluded);
}

double hit_at(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k) {
  const auto depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r) {
    if (contains_sorted(relevant, ranked[r])) return 1.0;
  }
  return 0.0;
}

double ndcg_at(std::span<const ItemIndex> ranked,
               std::span<const ItemIndex> relevant, std::size_t k) {
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const auto depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r) {
    if (contains_sorted(relevant, ranked[r])) dcg += discount(r + 1);
  }
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(k, relevant.size()); ++r) {
    idcg += discount(r);
  }
  return dcg / idcg;
}

namespace {

template <typename PerUser>
double mean_over_users(std::span<const ItemList> recommendations,
                       std::span<const ItemList> relevant, PerUser per_user) {
  if (recommendations.size() != relevant.size()) {
    throw DimensionError("recommendation and ground-truth lists differ in length");
  }
  double sum = 0.0;
  std::size_t users = 0;
  for (std::size_t u = 0; u < relevant.size(); ++u) {
    if (relevant[u].empty()) continue;
    sum += per_user(recommendations[u], relevant[u]);
    ++users;
  }
  return users ? sum / static_cast<double>(users) : 0.0;
}

}  // namespace

double hit_rate(std::span<const ItemList> recommendations,
                std::span<const ItemList> relevant, std::size_t k) {
  return mean_over_users(recommendations, relevant,
                         [k](const ItemList& r, const ItemList& t) {
                           return hit_at(r, t, k);
                         });
}

double ndcg(std::span<const ItemList> recommendations,
            std::span<const ItemList> relevant, std::size_t k) {
  return mean_over_users(recommendations, relevant,
                         [k](const ItemList& r, const ItemList& t) {
                           return ndcg_at(r, t, k);
                         });
}

double coverage(std::span<const ItemList> recommendations, std::size_t k,
                std::size_t num_items) {
  if (num_items == 0) return 0.0;
  std::vector<char> seen(num_items, 0);
  std::size_t distinct = 0;
  for (const auto& list : recommendations) {
    for (std::size_t r = 0; r < std::min(k, list.size()); ++r) {
      if (list[r] >= num_items) throw DimensionError("recommended item out of range");
      if (!seen[list[r]]) {
        seen[list[r]] = 1;
        ++distinct;
      }
    }
  }
  return static_cast<double>(distinct) / static_cast<double>(num_items);
}

TimingStats summarize_timings(std::vector<double> seconds) {
  TimingStats t;
  t.count = seconds.size();
  if (seconds.empty()) return t;
  std::sort(seconds.begin(), seconds.end());
  t.total = std::accumulate(seconds.begin(), seconds.end(), 0.0);
  t.mean = t.total / static_cast<double>(t.count);
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(t.count)) - 1.0);
    return seconds[std::min(idx, t.count - 1)];
  };
  t.p50 = quantile(0.5);
  t.p99 = quantile(0.99);
  double var = 0.0;
  for (const double s : seconds) var += (s - t.mean) * (s - t.mean);
  t.stddev = t.count > 1 ? std::sqrt(var / static_cast<double>(t.count - 1)) : 0.0;
  return t;
}

ItemList EvalContext::exclusions(UserIndex user) const {
  ItemList history = sorted_union(train.row(user), warm.row(user));
  ItemList unrankable;
  for (std::size_t i = 0; i < rankable.size(); ++i) {
    if (!rankable[i]) unrankable.push_back(static_cast<ItemIndex>(i));
  }
  return sorted_union(history, unrankable);
}

EvalContext make_eval_context(const TemporalSplit& split) {
  EvalContext ctx;
  ctx.train = build_matrix(split.train);
  ctx.warm = build_matrix(split.warm);
  ctx.warm_users = active_users(split.warm);
  const auto degrees = ctx.train.column_counts();
  ctx.rankable.resize(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) ctx.rankable[i] = degrees[i] > 0;

  const auto test = build_matrix(split.test);
  for (std::size_t u = 0; u < test.rows(); ++u) {
    const auto user = static_cast<UserIndex>(u);
    const auto row = test.row(user);
    if (row.empty()) continue;
    if (ctx.train.row_size(user) == 0 && ctx.warm.row_size(user) == 0) {
      ++ctx.stateless_test_users;
      continue;
    }
    ItemList truth;
    for (const auto i : row) {
      if (ctx.rankable[i] && !ctx.train.contains(user, i) &&
          !ctx.warm.contains(user, i)) {
        truth.push_back(i);
      }
    }
    if (truth.empty()) {
      ++ctx.dropped_test_users;
      continue;
    }
    ctx.test_users.push_back(user);
    ctx.truth.push_back(std::move(truth));
  }
  return ctx;
}

FoldInRun run_foldin(const EmbeddingModel& model, const EvalContext& context,
                     const TemporalSplit& split, Strategy strategy,
                     const SgdFoldInConfig& sgd, const TrainConfig& retrain,
                     std::optional<FoldInPlan> plan) {
  FoldInRun run;
  run.strategy = strategy;
  if (strategy == Strategy::kFull) {
    if (model.kind != ModelKind::kUltraGcn) {
      throw DataError("full retrain applies to UltraGCN models");
    }
    const auto start = Clock::now();
    run.retrained = full_retrain(split.train, split.warm, retrain);
    const auto total = elapsed_ns(start);
    const auto per_user =
        context.warm_users.empty()
            ? 0
            : total / static_cast<std::int64_t>(context.warm_users.size());
    for (const auto u : context.warm_users) {
      UserFoldIn r;
      r.user = u;
      r.embedding = run.retrained->users.row(u).transpose();
      r.degree = run.retrained->stats.user_degrees[u];
      r.beta = run.retrained->stats.user_beta[u];
      r.time_ns = per_user;
      run.users.push_back(std::move(r));
    }
    return run;
  }

  const auto build_start = Clock::now();
  FoldInEngine engine(model, strategy, sgd, std::move(plan));
  run.plan_build_seconds = static_cast<double>(elapsed_ns(build_start)) * 1e-9;

  std::vector<FoldInRequest> requests;
  requests.reserve(context.warm_users.size());
  for (const auto u : context.warm_users) {
    requests.push_back(
        FoldInRequest::from(merge_for_foldin(context.train, context.warm, u)));
  }
  for (std::size_t k = 0; k < std::min<std::size_t>(5, requests.size()); ++k) {
    (void)engine.fold_in(requests[k]);
  }
  for (const auto& req : requests) {
    const auto start = Clock::now();
    Vector e = engine.fold_in(req);
    const auto ns = elapsed_ns(start);
    UserFoldIn r;
    r.user = req.user;
    r.beta = req.beta;
    r.degree = static_cast<std::int64_t>(req.items.size());
    r.embedding = std::move(e);
    r.time_ns = ns;
    run.users.push_back(std::move(r));
  }
  run.flagged = engine.flagged();
  return run;
}

EmbeddingModel apply_foldin(const EmbeddingModel& model, const FoldInRun& run) {
  if (run.retrained) return *run.retrained;
  EmbeddingModel out = model;
  if (run.strategy == Strategy::kZero) return out;
  for (const auto& r : run.users) {
    if (static_cast<std::size_t>(r.embedding.size()) != out.rank()) {
      throw DimensionError("fold-in embedding does not match model rank");
    }
    out.users.row(r.user) = r.embedding.transpose();
    out.stats.user_degrees[r.user] = r.degree;
    out.stats.user_beta[r.user] = r.beta;
  }
  return out;
}

MetricRow evaluate_model(const EmbeddingModel& model,
                         const EvalContext& context,
                         std::span<const std::size_t> ks,
                         std::string strategy_name) {
  if (ks.empty()) throw DataError("no cutoffs given");
  const std::size_t depth = *std::max_element(ks.begin(), ks.end());
  MetricRow row;
  row.strategy = std::move(strategy_name);
  row.ks.assign(ks.begin(), ks.end());
  std::vector<ItemList> lists;
  lists.reserve(context.test_users.size());
  for (const auto u : context.test_users) {
    if (model.stats.user_degrees[u] == 0) ++row.cold_users;
    const Vector scores = item_scores(model, model.users.row(u).transpose());
    lists.push_back(topk(scores, depth, context.exclusions(u)));
  }
  row.users = lists.size();
  for (const auto k : ks) {
    row.hit_rate.push_back(hit_rate(lists, context.truth, k));
    row.ndcg.push_back(ndcg(lists, context.truth, k));
  }
  row.coverage = coverage(lists, depth, model.num_items());
  return row;
}

EvalReport evaluate_strategy(const EmbeddingModel& model,
                             const TemporalSplit& split,
                             const EvalContext& context, Strategy strategy,
                             std::span<const std::size_t> ks,
                             const SgdFoldInConfig& sgd,
                             const TrainConfig& retrain) {
  const FoldInRun run = run_foldin(model, context, split, strategy, sgd, retrain);
  EvalReport report;
  report.metrics = evaluate_model(apply_foldin(model, run), context, ks,
                                  std::string(to_string(strategy)));
  std::vector<double> seconds;
  seconds.reserve(run.users.size());
  for (const auto& r : run.users) {
    seconds.push_back(static_cast<double>(r.time_ns) * 1e-9);
  }
  report.timing = summarize_timings(std::move(seconds));
  report.plan_build_seconds = run.plan_build_seconds;
  report.flagged = run.flagged;
  return report;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  if (rows.empty()) return;
  const auto& ks = rows.front().ks;
  out << "strategy,users,cold_users";
  for (const auto k : ks) out << ",hr@" << k;
  for (const auto k : ks) out << ",ndcg@" << k;
  out << ",coverage@" << *std::max_element(ks.begin(), ks.end()) << '\n';
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.users << ',' << r.cold_users;
    for (const double v : r.hit_rate) out << ',' << format_fixed(v);
    for (const double v : r.ndcg) out << ',' << format_fixed(v);
    out << ',' << format_fixed(r.coverage) << '\n';
  }
}

void print_metric_table(std::ostream& out, std::span<const MetricRow> rows) {
  if (rows.empty()) return;
  const auto& ks = rows.front().ks;
  out << std::left << std::setw(10) << "strategy" << std::right << std::setw(8)
      << "users";
  for (const auto k : ks) out << std::setw(10) << ("H@" + std::to_string(k));
  for (const auto k : ks) out << std::setw(10) << ("N@" + std::to_string(k));
  out << std::setw(10)
      << ("Cov@" + std::to_string(*std::max_element(ks.begin(), ks.end())))
      << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(10) << r.strategy << std::right
        << std::setw(8) << r.users;
    for (const double v : r.hit_rate) out << std::setw(10) << format_fixed(v, 4);
    for (const double v : r.ndcg) out << std::setw(10) << format_fixed(v, 4);
    out << std::setw(10) << format_fixed(r.coverage, 4) << '\n';
  }
}

SgdTuning tune_sgd(const EmbeddingModel& model, const EvalContext& context,
                   const InteractionLog& warm, const SgdFoldInConfig& base,
                   std::span<const double> learning_rates,
                   std::span<const double> mixes, std::size_t max_users,
                   std::uint64_t seed) {
  // Latest warm event per user; later file position wins timestamp ties.
  std::vector<const Event*> latest(context.warm.rows(), nullptr);
  for (const auto& e : warm.events) {
    if (!latest[e.user] || e.timestamp >= latest[e.user]->timestamp) {
      latest[e.user] = &e;
    }
  }
  struct Probe {
    FoldInRequest request;
    ItemIndex held_out;
    ItemList excluded;
  };
  std::vector<UserIndex> candidates;
  for (const auto u : context.warm_users) {
    const auto row = context.warm.row(u);
    const auto held = latest[u]->item;
    if (row.size() < 2 || context.train.contains(u, held) ||
        !context.rankable[held]) {
      continue;
    }
    candidates.push_back(u);
  }
  Rng rng = make_rng(seed, "sgd_tuning");
  for (std::size_t k = candidates.size(); k > 1; --k) {
    std::swap(candidates[k - 1], candidates[uniform_index(rng, k)]);
  }
  if (candidates.size() > max_users) candidates.resize(max_users);
  std::sort(candidates.begin(), candidates.end());

  std::vector<Probe> probes;
  for (const auto u : candidates) {
    const auto held = latest[u]->item;
    ItemList rest;
    for (const auto i : context.warm.row(u)) {
      if (i != held) rest.push_back(i);
    }
    Probe p;
    p.held_out = held;
    p.request.user = u;
    p.request.items = sorted_union(context.train.row(u), rest);
    p.request.beta = user_weight(static_cast<std::int64_t>(p.request.items.size()));
    ItemList unrankable;
    for (std::size_t i = 0; i < context.rankable.size(); ++i) {
      if (!context.rankable[i]) unrankable.push_back(static_cast<ItemIndex>(i));
    }
    p.excluded = sorted_union(p.request.items, unrankable);
    probes.push_back(std::move(p));
  }

  SgdTuning tuning;
  tuning.users = probes.size();
  tuning.best = base;
  const Vector mean = mean_foldin(model);
  FoldInWorkspace workspace;
  for (const double lr : learning_rates) {
    for (const double mix : mixes) {
      SgdFoldInConfig cfg = base;
      cfg.learning_rate = lr;
      cfg.mix = mix;
      double total = 0.0;
      bool diverged = false;
      for (const auto& p : probes) {
        try {
          const Vector e = sgd_foldin(model, p.request, cfg, mean, workspace);
          const auto list = topk(item_scores(model, e), 10, p.excluded);
          const ItemIndex truth[] = {p.held_out};
          total += ndcg_at(list, truth, 10);
        } catch (const FoldInDivergedError&) {
          diverged = true;
          break;
        }
      }
      const double score =
          diverged ? -1.0
                   : (probes.empty() ? 0.0 : total / static_cast<double>(probes.size()));
      tuning.grid.push_back({lr, mix, score});
      if (score > tuning.best_ndcg) {
        tuning.best_ndcg = score;
        tuning.best = cfg;
      }
    }
  }
  return tuning;
}

ScalingTable scaling_bench(const ScalingOptions& options) {
  if (options.trials < 10) throw DataError("scaling benchmark needs >= 10 trials");
  if (!std::is_sorted(options.sizes.begin(), options.sizes.end())) {
    throw DataError("catalogue sizes must be ascending");
  }
  constexpr std::size_t kWarmup = 5;
  ScalingTable table;
  for (const auto n : options.sizes) {
    if (scaling_footprint(n, options.rank) > available_memory() / 10 * 8) {
      table.partial = true;
      table.skipped.push_back(n);
      continue;
    }
    try {
      const EmbeddingModel model = synthetic::random_item_side(
          n, options.rank, options.zipf_exponent, derive_seed(options.seed, "bench/model", n));
      const auto build_start = Clock::now();
      const FoldInPlan plan = build_plan(model);
      const double build_seconds =
          static_cast<double>(elapsed_ns(build_start)) * 1e-9;

      const synthetic::ZipfSampler popularity(n, options.zipf_exponent);
      Rng rng = make_rng(options.seed, "bench/users", n);
      std::vector<FoldInRequest> requests(options.trials + kWarmup);
      for (std::size_t t = 0; t < requests.size(); ++t) {
        auto& r = requests[t];
        r.user = static_cast<UserIndex>(t);
        r.items = synthetic::sample_history(popularity, options.history_mean, rng);
        r.beta = user_weight(static_cast<std::int64_t>(r.items.size()));
      }

      auto time_calls = [&](auto&& call) {
        for (std::size_t t = 0; t < kWarmup; ++t) call(requests[t]);
        std::vector<double> seconds;
        seconds.reserve(options.trials);
        for (std::size_t t = kWarmup; t < requests.size(); ++t) {
          const auto start = Clock::now();
          call(requests[t]);
          seconds.push_back(static_cast<double>(elapsed_ns(start)) * 1e-9);
        }
        return summarize_timings(std::move(seconds));
      };
      auto add_row = [&](std::string name, const TimingStats& s, double build) {
        table.rows.push_back({std::move(name), n, options.rank, options.trials,
                              s.mean, s.stddev, s.p50, s.p99, build});
      };

      FoldInWorkspace workspace;
      Vector sink = Vector::Zero(static_cast<Eigen::Index>(options.rank));
      add_row("linear", time_calls([&](const FoldInRequest& r) {
                sink += linear_foldin(plan, r, workspace);
              }),
              build_seconds);

      if (options.include_sgd) {
        // Step size 1 / L for the largest possible beta_u (degree 1); the
        // cost per call does not depend on it, only convergence does.
        const auto beta = Eigen::Map<const Vector>(
            model.stats.item_beta.data(), static_cast<Eigen::Index>(n));
        const RowMatrix weighted = beta.asDiagonal() * model.items;
        const Matrix gram = weighted.transpose() * weighted;
        const double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram)
                               .eigenvalues()
                               .maxCoeff();
        const double bu = user_weight(1);
        SgdFoldInConfig cfg;
        cfg.steps = options.sgd_steps;
        cfg.learning_rate = 1.0 / (2.0 * bu * bu * top);
        cfg.mix = 0.0;
        cfg.init = SgdInit::kZero;
        const Vector mean = Vector::Zero(static_cast<Eigen::Index>(options.rank));
        add_row("sgd", time_calls([&](const FoldInRequest& r) {
                  sink += sgd_foldin(model, r, cfg, mean, workspace);
                }),
                0.0);
      }
      if (!sink.allFinite()) throw NumericError("benchmark produced non-finite output");
    } catch (const std::bad_alloc&) {
      table.partial = true;
      table.skipped.push_back(n);
    }
  }
  return table;
}

void write_scaling_csv(std::ostream& out, const ScalingTable& table) {
  out << "strategy,n_items,rank,trials,mean_sec,stddev_sec,p50_sec,p99_sec,"
         "plan_build_sec\n";
  out << std::setprecision(9);
  for (const auto& r : table.rows) {
    out << r.strategy << ',' << r.num_items << ',' << r.rank << ',' << r.trials
        << ',' << r.mean << ',' << r.stddev << ',' << r.p50 << ',' << r.p99
        << ',' << r.plan_build_seconds << '\n';
  }
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DimensionError("slope fit needs at least two paired points");
  }
  double mx = 0.0;
  double my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace warmfold
