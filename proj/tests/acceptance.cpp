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

// Acceptance gate. `acceptance N` runs criterion N and exits 0 (pass),
// 1 (fail) or 77 (skip); without arguments every criterion runs and one
// verdict line is printed per criterion.
//
// The MovieLens-1M criteria look for ratings.dat at $WARMFOLD_ML1M (file or
// directory), then data/ml-1m/ratings.dat under the source tree and the
// working directory. They skip when it is absent.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "support.hpp"
#include "warmfold/cli.hpp"
#include "warmfold/error.hpp"
#include "warmfold/eval.hpp"
#include "warmfold/foldin.hpp"
#include "warmfold/synthetic.hpp"

namespace warmfold {
namespace {

namespace fs = std::filesystem;
using testing::gaussian;
using testing::random_support;
using testing::relative_error;

enum class Status { kPass, kFail, kSkip };

struct Verdict {
  Status status = Status::kFail;
  std::string detail;
};

Verdict verdict(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

FoldInRequest request(UserIndex user, std::vector<ItemIndex> items, double beta) {
  FoldInRequest r;
  r.user = user;
  r.items = std::move(items);
  r.beta = beta;
  return r;
}

Vector dense_a(const FoldInRequest& r, std::size_t n) {
  Vector a = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < r.items.size(); ++k) a(r.items[k]) = r.value(k);
  return a;
}

Vector item_beta(const EmbeddingModel& m) {
  return Eigen::Map<const Vector>(m.stats.item_beta.data(),
                                  static_cast<Eigen::Index>(m.stats.item_beta.size()));
}

void set_constant_item_degree(EmbeddingModel& m, std::int64_t degree) {
  for (auto& d : m.stats.item_degrees) d = degree;
  for (auto& b : m.stats.item_beta) b = item_weight(degree);
}

// Closed form and exact WLS against dense Householder solves of the systems
// they claim to minimize.
Verdict closed_form() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(101, "acceptance-closed-form");
  double linear_err = 0.0;
  double wls_err = 0.0;
  double coincide_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + uniform_index(rng, 32);
    const std::size_t n = d + 8 + uniform_index(rng, 500 - d - 7);
    const double density = 0.02 + 0.3 * NormalSampler::uniform(rng);
    auto m = testing::random_ultragcn(6, n, d, rng, 1.0, density);
    auto r = request(0, random_support(n, 1 + uniform_index(rng, std::min<std::size_t>(n, 40)), rng),
                     user_weight(static_cast<std::int64_t>(1 + uniform_index(rng, 60))));
    if (trial % 2 == 1) {
      // Graded feedback on half the instances.
      for (std::size_t k = 0; k < r.items.size(); ++k) {
        r.values.push_back(1.0 + static_cast<double>(uniform_index(rng, 5)));
      }
    }
    const Vector a = dense_a(r, n);
    const Matrix v = m.items;

    const Vector linear = linear_foldin(build_plan(m), r);
    const Vector reweighted_target = a.cwiseQuotient(item_beta(m));
    const Vector linear_oracle = (r.beta * v).colPivHouseholderQr().solve(reweighted_target);
    linear_err = std::max(linear_err, relative_error(linear, linear_oracle));

    const auto wls = exact_wls_foldin(m, r);
    const Matrix weighted = r.beta * (item_beta(m).asDiagonal() * v);
    const Vector wls_oracle = weighted.colPivHouseholderQr().solve(a);
    wls_err = std::max(wls_err, relative_error(wls.embedding, wls_oracle));

    set_constant_item_degree(m, static_cast<std::int64_t>(uniform_index(rng, 30)));
    coincide_err = std::max(coincide_err, relative_error(linear_foldin(build_plan(m), r),
                                                         exact_wls_foldin(m, r).embedding));
  }
  const double elapsed = seconds_since(start);
  const bool ok = linear_err < 1e-8 && wls_err < 1e-8 && coincide_err < 1e-10 && elapsed < 60.0;
  return verdict(ok, "200 instances: linear vs oracle " + fmt("%.2e", linear_err) +
                         ", wls vs oracle " + fmt("%.2e", wls_err) +
                         ", constant-beta gap " + fmt("%.2e", coincide_err) + ", " +
                         fmt("%.1f", elapsed) + " s");
}

EmbeddingModel svd_model(const Matrix& v, const Vector& sigma) {
  EmbeddingModel m;
  m.kind = ModelKind::kPureSvd;
  m.items = v;
  m.users = RowMatrix::Zero(1, v.cols());
  m.sigma = sigma;
  m.stats = graph_stats(build_matrix({}, 1, static_cast<std::size_t>(v.rows())));
  return m;
}

Verdict svd_exactness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(102, "acceptance-svd");
  double oracle_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + uniform_index(rng, 32);
    const std::size_t n = d + 5 + uniform_index(rng, 400);
    const Matrix q = orthonormal_basis(gaussian(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(d), rng));
    const Vector sigma = (gaussian(static_cast<Eigen::Index>(d), 1, rng).cwiseAbs().array() + 0.1)
                             .matrix();
    const auto m = svd_model(q, sigma);
    const auto r = request(0, random_support(n, 1 + uniform_index(rng, n / 2), rng), 0.0);
    const Vector e = svd_foldin(m, r).embedding;
    const Vector oracle = (q * sigma.asDiagonal()).colPivHouseholderQr().solve(dense_a(r, n));
    oracle_err = std::max(oracle_err, relative_error(e, oracle));
  }

  // Rows are copies of d independent binary patterns, so the matrix has rank
  // exactly d and every training row lies in the learned subspace.
  double row_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + uniform_index(rng, 7);
    const std::size_t n = 20 + uniform_index(rng, 60);
    std::vector<std::vector<ItemIndex>> patterns;
    Matrix basis;
    do {
      patterns.clear();
      basis = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
      for (std::size_t p = 0; p < d; ++p) {
        patterns.push_back(random_support(n, 2 + uniform_index(rng, n / 3), rng));
        for (const auto i : patterns.back()) basis(static_cast<Eigen::Index>(p), i) = 1.0;
      }
    } while (static_cast<std::size_t>(basis.fullPivLu().rank()) != d);
    std::vector<Event> events;
    const std::size_t users = 4 * d;
    for (std::size_t u = 0; u < users; ++u) {
      for (const auto i : patterns[u % d]) events.push_back({static_cast<UserIndex>(u), i, 0});
    }
    const auto matrix = build_matrix(events, users, n);
    const auto m = train_puresvd(matrix, d, 1000 + static_cast<std::uint64_t>(trial));
    for (std::size_t u = 0; u < users; ++u) {
      const auto row = matrix.row(static_cast<UserIndex>(u));
      const auto e = svd_foldin(m, request(static_cast<UserIndex>(u), {row.begin(), row.end()}, 0.0));
      row_err = std::max(row_err,
                         (e.embedding - m.users.row(static_cast<Eigen::Index>(u)).transpose())
                             .cwiseAbs()
                             .maxCoeff());
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = oracle_err < 1e-10 && row_err < 1e-8 && elapsed < 30.0;
  return verdict(ok, "100 instances vs oracle " + fmt("%.2e", oracle_err) +
                         ", exact-rank row reproduction " + fmt("%.2e", row_err) + ", " +
                         fmt("%.1f", elapsed) + " s");
}

// Normwise: max |g - fd| / max |g|.
double foldin_gradient_error(const EmbeddingModel& m, const FoldInRequest& r, const Vector& e) {
  FoldInWorkspace ws;
  const Vector g = foldin_gradient(m, r, e, ws);
  Vector fd(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    Vector up = e, down = e;
    up(k) += 1e-5;
    down(k) -= 1e-5;
    fd(k) = (foldin_objective(m, r, up) - foldin_objective(m, r, down)) / 2e-5;
  }
  return (g - fd).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff();
}

double training_gradient_error(EmbeddingModel m, std::span<const TrainingSample> batch,
                               const LossWeights& w) {
  const auto g = loss_and_gradient(m, batch, w);
  RowMatrix fd_users = RowMatrix::Zero(m.users.rows(), m.users.cols());
  RowMatrix fd_items = RowMatrix::Zero(m.items.rows(), m.items.cols());
  auto probe = [&](RowMatrix& target, RowMatrix& out) {
    for (Eigen::Index k = 0; k < target.size(); ++k) {
      const double saved = target.data()[k];
      target.data()[k] = saved + 1e-5;
      const double up = loss_and_gradient(m, batch, w).loss;
      target.data()[k] = saved - 1e-5;
      const double down = loss_and_gradient(m, batch, w).loss;
      target.data()[k] = saved;
      out.data()[k] = (up - down) / 2e-5;
    }
  };
  probe(m.users, fd_users);
  probe(m.items, fd_items);
  const double scale =
      std::max(g.user_grad.cwiseAbs().maxCoeff(), g.item_grad.cwiseAbs().maxCoeff());
  return std::max((g.user_grad - fd_users).cwiseAbs().maxCoeff(),
                  (g.item_grad - fd_items).cwiseAbs().maxCoeff()) /
         scale;
}

Verdict gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(103, "acceptance-gradient");
  double foldin_err = 0.0;
  double train_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t users = 3 + uniform_index(rng, 5);
    const std::size_t items = 6 + uniform_index(rng, 20);
    const std::size_t d = 2 + uniform_index(rng, 7);
    const auto m = testing::random_ultragcn(users, items, d, rng, 0.5, 0.3);

    const auto r = request(0, random_support(items, 1 + uniform_index(rng, items / 2), rng),
                           user_weight(static_cast<std::int64_t>(1 + uniform_index(rng, 20))));
    foldin_err = std::max(foldin_err,
                          foldin_gradient_error(m, r, gaussian(static_cast<Eigen::Index>(d), 1, rng)));

    std::vector<TrainingSample> batch;
    for (UserIndex u = 0; u < users; ++u) {
      TrainingSample s{u, static_cast<ItemIndex>(uniform_index(rng, 3)), {}};
      for (ItemIndex j = 3; j < items; ++j) {
        if (uniform_index(rng, 2)) s.negatives.push_back(j);
      }
      if (s.negatives.empty()) s.negatives.push_back(static_cast<ItemIndex>(items - 1));
      batch.push_back(std::move(s));
    }
    const double lambda = 2.0 * NormalSampler::uniform(rng);
    train_err = std::max(train_err, training_gradient_error(m, batch, {1.0, lambda}));
  }
  const double elapsed = seconds_since(start);
  const bool ok = foldin_err < 1e-5 && train_err < 1e-5 && elapsed < 60.0;
  return verdict(ok, "20 models: fold-in gradient " + fmt("%.2e", foldin_err) + ", training " +
                         fmt("%.2e", train_err) + ", " + fmt("%.1f", elapsed) + " s");
}

// The step size is tuned on the objective value reached, not on distance to
// the exact minimizer.
Verdict sgd_convergence() {
  Rng rng = make_rng(104, "acceptance-sgd");
  double worst = 0.0;
  std::string chosen;
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_ultragcn(20, 500, 32, rng, 1.0, 0.02);
    const std::size_t support = 10 + uniform_index(rng, 50);
    const auto r = request(0, random_support(500, support, rng),
                           user_weight(static_cast<std::int64_t>(support)));
    const Vector best = exact_wls_foldin(m, r).embedding;
    double best_obj = std::numeric_limits<double>::infinity();
    Vector tuned;
    double tuned_lr = 0.0;
    for (const double lr : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1}) {
      SgdFoldInConfig c;
      c.steps = 200;
      c.learning_rate = lr;
      c.mix = 0.0;
      c.init = SgdInit::kZero;
      try {
        const Vector e = sgd_foldin(m, r, c);
        const double obj = foldin_objective(m, r, e);
        if (obj < best_obj) {
          best_obj = obj;
          tuned = e;
          tuned_lr = lr;
        }
      } catch (const FoldInDivergedError&) {
      }
    }
    if (tuned.size() == 0) return verdict(false, "every step size diverged");
    worst = std::max(worst, relative_error(tuned, best));
    chosen += (chosen.empty() ? "" : ",") + fmt("%g", tuned_lr);
  }
  return verdict(worst < 1e-2, "10 instances 500x32, k = 200: worst relative error " +
                                   fmt("%.2e", worst) + " (tuned step sizes " + chosen + ")");
}

Verdict scaling_law() {
  const auto start = std::chrono::steady_clock::now();
  ScalingOptions o;
  o.rank = 32;
  o.sizes = {1000, 10000, 100000, 1000000};
  o.trials = 100;
  o.include_sgd = false;
  o.seed = derive_seed(105, "bench");
  const auto table = scaling_bench(o);
  const double elapsed = seconds_since(start);
  if (table.partial) return verdict(false, "sweep incomplete: not enough memory");
  std::vector<double> n;
  std::vector<double> t;
  std::string points;
  for (const auto& row : table.rows) {
    n.push_back(static_cast<double>(row.num_items));
    t.push_back(row.mean);
    points += " " + fmt("%.0e", n.back()) + ":" + fmt("%.3g", row.mean);
  }
  const double slope = loglog_slope(n, t);
  const bool ok = slope >= 0.85 && slope <= 1.15 && elapsed < 600.0;
  return verdict(ok, "slope " + fmt("%.3f", slope) + " (need [0.85, 1.15]); mean sec/user" +
                         points + "; " + fmt("%.1f", elapsed) + " s");
}

Verdict speedup() {
  ScalingOptions o;
  o.rank = 32;
  o.sizes = {10000, 100000};
  o.trials = 100;
  o.sgd_steps = 50;
  o.include_sgd = true;
  o.seed = derive_seed(106, "bench");
  const auto table = scaling_bench(o);
  if (table.partial) return verdict(false, "sweep incomplete: not enough memory");
  std::map<std::size_t, std::map<std::string, double>> mean;
  for (const auto& row : table.rows) mean[row.num_items][row.strategy] = row.mean;
  bool ok = true;
  std::string detail;
  for (const auto& [size, by] : mean) {
    const double ratio = by.at("sgd") / by.at("linear");
    ok = ok && ratio >= 5.0;
    detail += (detail.empty() ? "" : ", ") + std::string("N=") + fmt("%.0e", static_cast<double>(size)) +
              " sgd/linear " + fmt("%.1f", ratio) + "x";
  }
  return verdict(ok, detail + " (need >= 5x)");
}

std::optional<fs::path> movielens_path() {
  std::vector<fs::path> candidates;
  if (const char* env = std::getenv("WARMFOLD_ML1M")) candidates.emplace_back(env);
  candidates.emplace_back(fs::path(WARMFOLD_SOURCE_DIR) / "data" / "ml-1m" / "ratings.dat");
  candidates.emplace_back(fs::path("data") / "ml-1m" / "ratings.dat");
  for (auto p : candidates) {
    if (fs::is_directory(p)) p /= "ratings.dat";
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

const char* kMissingMovielens =
    "MovieLens-1M ratings.dat not found (set WARMFOLD_ML1M)";

struct PipelineResult {
  std::map<std::string, double> ndcg10;
  std::map<std::string, double> coverage10;
  double sgd_mix = 0.0;
  double seconds = 0.0;
};

// train -> foldin (with SGD tuning) -> eval through the command layer with the
// default configuration.
PipelineResult run_pipeline(const fs::path& data, const std::string& format) {
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir;
  const auto config = cli::config_from_text(
      "", {"data.path=" + data.string(), "data.format=" + format,
           "output=" + dir.path().string(), "foldin.tune_sgd=true", "eval.ks=10"});
  std::ostringstream log;
  if (cli::cmd_train(config, log) != cli::kOk || cli::cmd_foldin(config, log) != cli::kOk ||
      cli::cmd_eval(config, log) != cli::kOk) {
    throw Error("pipeline failed:\n" + log.str());
  }
  PipelineResult result;
  const std::string text = log.str();
  const auto at = text.find(" mix ");
  if (at != std::string::npos) result.sgd_mix = std::stod(text.substr(at + 5));

  std::ifstream csv(dir.path() / "metrics.csv");
  std::string line;
  std::getline(csv, line);  // strategy,users,cold_users,hr@10,ndcg@10,coverage@10
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() < 6) continue;
    result.ndcg10[cells[0]] = std::stod(cells[4]);
    result.coverage10[cells[0]] = std::stod(cells[5]);
  }
  result.seconds = seconds_since(start);
  return result;
}

std::string describe(const PipelineResult& p) {
  std::string s;
  for (const char* name : {"linear", "sgd", "mean", "zero"}) {
    s += std::string(s.empty() ? "" : ", ") + name + " ndcg@10 " + fmt("%.4f", p.ndcg10.at(name)) +
         " cov@10 " + fmt("%.4f", p.coverage10.at(name));
  }
  return s + "; sgd mix " + fmt("%g", p.sgd_mix);
}

bool quality_order(const PipelineResult& p) {
  const auto& n = p.ndcg10;
  return n.at("linear") >= n.at("sgd") && n.at("sgd") >= n.at("mean") &&
         n.at("linear") >= n.at("zero");
}

bool coverage_order(const PipelineResult& p) {
  return p.coverage10.at("linear") > p.coverage10.at("sgd") && p.sgd_mix > 0.0;
}

// Stand-in run on a synthetic latent-factor log. Reported, never gated.
std::string supplementary(const std::function<bool(const PipelineResult&)>& holds) {
  testing::TempDir dir;
  const auto path = dir.path() / "latent.csv";
  {
    const auto log = synthetic::latent_log({});
    std::ofstream f(path);
    f << "user,item,timestamp\n";
    for (const auto& e : log.events) f << e.user << ',' << e.item << ',' << e.timestamp << '\n';
  }
  const auto p = run_pipeline(path, "csv");
  return std::string("; synthetic stand-in, not gated: ") + describe(p) + " -> ordering " +
         (holds(p) ? "holds" : "does not hold");
}

Verdict quality_ordering() {
  const auto path = movielens_path();
  if (!path) return {Status::kSkip, kMissingMovielens + supplementary(quality_order)};
  const auto p = run_pipeline(*path, "movielens");
  return verdict(quality_order(p) && p.seconds < 1800.0,
                 describe(p) + "; " + fmt("%.0f", p.seconds) + " s");
}

Verdict coverage_direction() {
  const auto path = movielens_path();
  if (!path) return {Status::kSkip, kMissingMovielens + supplementary(coverage_order)};
  const auto p = run_pipeline(*path, "movielens");
  return verdict(coverage_order(p), describe(p));
}

Verdict metric_suite() {
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  auto vec = [](std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (const double x : v) out(k++) = x;
    return out;
  };
  check(topk(vec({0.1, 0.9, 0.5}), 2, {}) == ItemList{1, 2}, "topk [0.1,0.9,0.5] k=2");
  check(topk(vec({0.9, 0.9}), 1, {}) == ItemList{0}, "topk tie");
  try {
    topk(vec({0.1, 0.9}), 3, {});
    failures.push_back("topk k too large");
  } catch (const DimensionError&) {
  }

  const ItemList truth{7};
  const ItemList rank1{7, 1, 2, 3, 4};
  const ItemList rank7{1, 2, 3, 4, 5, 6, 7};
  check(hit_at(rank1, truth, 5) == 1.0, "HR rank 1");
  check(hit_at(rank7, truth, 5) == 0.0, "HR rank 7");
  const std::vector<ItemList> two{rank1, rank7};
  check(hit_rate(two, std::vector<ItemList>{truth, truth}, 5) == 0.5, "HR mean");
  check(hit_rate(two, std::vector<ItemList>{truth, {}}, 5) == 1.0, "HR empty test set");

  const ItemList ranked{10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  check(ndcg_at(ranked, ItemList{10}, 10) == 1.0, "NDCG rank 1");
  check(ndcg_at(ranked, ItemList{12}, 10) == 0.5, "NDCG rank 3");
  const double two_hit = ndcg_at(ranked, ItemList{11, 14}, 5);
  check(std::abs(two_hit - 0.62406) <= 1e-5, "NDCG two-hit " + fmt("%.7f", two_hit));
  const double idcg = 1.0 + 1.0 / std::log2(3.0);
  check(std::abs(idcg - 1.63093) <= 1e-5, "IDCG two-hit");

  const std::vector<ItemList> same(5, ItemList{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  check(coverage(same, 10, 100) == 0.1, "coverage identical lists");
  std::vector<ItemList> disjoint;
  for (ItemIndex u = 0; u < 4; ++u) {
    ItemList l;
    for (ItemIndex k = 0; k < 10; ++k) l.push_back(u * 10 + k);
    disjoint.push_back(l);
  }
  check(coverage(disjoint, 10, 100) == 0.4, "coverage disjoint");
  check(coverage(disjoint, 10, 40) == 1.0, "coverage disjoint saturated");

  std::string detail = failures.empty() ? "all hand examples reproduced" : "failed:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return verdict(failures.empty(), detail + "; NDCG two-hit " + fmt("%.7f", two_hit));
}

Verdict data_fidelity() {
  const auto path = movielens_path();
  if (!path) return {Status::kSkip, kMissingMovielens};
  const auto log = ingest(*path, InputFormat::kMovieLens);
  const double density = 100.0 * static_cast<double>(log.events.size()) /
                         (static_cast<double>(log.num_users) * static_cast<double>(log.num_items));
  const bool counts = log.num_users == 6040 && log.num_items == 3706 &&
                      log.events.size() == 1000209;
  const bool dens = std::abs(std::round(density * 100.0) / 100.0 - 5.43) < 1e-9;
  return verdict(counts && dens, "users " + std::to_string(log.num_users) + ", items " +
                                     std::to_string(log.num_items) + ", actions " +
                                     std::to_string(log.events.size()) + ", density " +
                                     fmt("%.2f", density) + "% (expected 5.43%)");
}

const std::vector<std::pair<const char*, Verdict (*)()>> kCriteria{
    {"closed-form correctness", closed_form},
    {"SVD fold-in exactness", svd_exactness},
    {"gradient fidelity", gradient_fidelity},
    {"SGD convergence", sgd_convergence},
    {"scaling law", scaling_law},
    {"speedup direction", speedup},
    {"quality ordering", quality_ordering},
    {"coverage direction", coverage_direction},
    {"metric unit suite", metric_suite},
    {"data fidelity", data_fidelity},
};

Status run_one(std::size_t k) {
  Verdict v;
  try {
    v = kCriteria[k - 1].second();
  } catch (const std::exception& e) {
    v = {Status::kFail, std::string("exception: ") + e.what()};
  }
  const char* tag = v.status == Status::kPass ? "PASS" : v.status == Status::kFail ? "FAIL" : "SKIP";
  std::cout << "criterion " << k << " " << tag << " " << kCriteria[k - 1].first << ": " << v.detail
            << std::endl;
  return v.status;
}

}  // namespace
}  // namespace warmfold

int main(int argc, char** argv) {
  using warmfold::Status;
  const std::size_t count = warmfold::kCriteria.size();
  if (argc > 2) {
    std::cerr << "usage: acceptance [criterion 1-" << count << "]\n";
    return 1;
  }
  if (argc == 2) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || static_cast<std::size_t>(k) > count) {
      std::cerr << "unknown criterion " << argv[1] << '\n';
      return 1;
    }
    const auto s = warmfold::run_one(static_cast<std::size_t>(k));
    return s == Status::kPass ? 0 : s == Status::kSkip ? 77 : 1;
  }
  bool failed = false;
  for (std::size_t k = 1; k <= count; ++k) failed |= warmfold::run_one(k) == Status::kFail;
  return failed ? 1 : 0;
}
