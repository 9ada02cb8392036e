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

#include "warmfold/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "warmfold/model_io.hpp"
#include "warmfold/random.hpp"
#include "warmfold/synthetic.hpp"

namespace warmfold::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"", {"seed", "output"}},
      {"data",
       {"path", "format", "train_fraction", "warm_fraction", "min_user_count",
        "min_item_count"}},
      {"model",
       {"kind", "rank", "lambda", "epochs", "batch_size", "negatives",
        "learning_rate", "init_scale"}},
      {"foldin",
       {"strategies", "sgd_steps", "sgd_learning_rate", "sgd_mix", "sgd_init",
        "tune_sgd", "tune_users"}},
      {"eval", {"ks"}},
      {"bench",
       {"sizes", "rank", "trials", "sgd_steps", "history_mean", "zipf",
        "include_sgd"}},
  };
  return keys;
}

void check_keys(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [name, child] : tree) {
    if (child.empty()) {
      const auto& top = keys.at("");
      if (std::find(top.begin(), top.end(), name) == top.end()) {
        throw ConfigError("unknown config key '" + name + "'");
      }
      continue;
    }
    const auto section = keys.find(name);
    if (section == keys.end() || name.empty()) {
      throw ConfigError("unknown config section [" + name + "]");
    }
    for (const auto& [key, value] : child) {
      if (std::find(section->second.begin(), section->second.end(), key) ==
          section->second.end()) {
        throw ConfigError("unknown config key '" + name + "." + key + "'");
      }
    }
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
T number(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  std::istringstream in(*node);
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    in >> value;
  } else {
    // Accept scientific notation for counts such as sizes = 1e5.
    long double wide = 0;
    in >> wide;
    if (wide < 0 && std::is_unsigned_v<T>) in.setstate(std::ios::failbit);
    value = static_cast<T>(wide);
    if (static_cast<long double>(value) != wide) in.setstate(std::ios::failbit);
  }
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("config key '" + key + "' has invalid value '" + *node + "'");
  }
  return value;
}

bool boolean(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  if (*node == "true" || *node == "1" || *node == "yes") return true;
  if (*node == "false" || *node == "0" || *node == "no") return false;
  throw ConfigError("config key '" + key + "' expects true or false");
}

template <typename T>
std::vector<T> numbers(const pt::ptree& tree, const std::string& key,
                       std::vector<T> fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  std::vector<T> out;
  for (const auto& item : split_list(*node)) {
    pt::ptree one;
    one.put("v", item);
    out.push_back(number<T>(one, "v", T{}));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
  return out;
}

template <typename Fn>
auto wrap(const std::string& key, Fn fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

RunConfig from_tree(pt::ptree tree, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not key=value");
    }
    tree.put(o.substr(0, eq), o.substr(eq + 1));
  }
  check_keys(tree);

  RunConfig c;
  c.seed = number<std::uint64_t>(tree, "seed", c.seed);
  c.output = tree.get<std::string>("output", c.output.string());

  c.dataset = tree.get<std::string>("data.path", "");
  if (const auto f = tree.get_optional<std::string>("data.format")) {
    c.format = wrap("data.format", [&] { return parse_input_format(*f); });
  }
  c.fractions.train = number(tree, "data.train_fraction", c.fractions.train);
  c.fractions.warm = number(tree, "data.warm_fraction", c.fractions.warm);
  c.fractions.test = 1.0 - c.fractions.train - c.fractions.warm;
  if (c.fractions.train <= 0.0 || c.fractions.warm < 0.0 ||
      c.fractions.test < -1e-12) {
    throw ConfigError("split fractions must be train > 0, warm >= 0, sum <= 1");
  }
  c.fractions.test = std::max(c.fractions.test, 0.0);
  c.min_user_count = number(tree, "data.min_user_count", c.min_user_count);
  c.min_item_count = number(tree, "data.min_item_count", c.min_item_count);

  if (const auto k = tree.get_optional<std::string>("model.kind")) {
    c.model = wrap("model.kind", [&] { return parse_model_kind(*k); });
  }
  c.train.rank = number(tree, "model.rank", c.train.rank);
  c.train.lambda = number(tree, "model.lambda", c.train.lambda);
  c.train.epochs = number(tree, "model.epochs", c.train.epochs);
  c.train.batch_size = number(tree, "model.batch_size", c.train.batch_size);
  c.train.negatives_per_positive =
      number(tree, "model.negatives", c.train.negatives_per_positive);
  c.train.learning_rate = number(tree, "model.learning_rate", c.train.learning_rate);
  c.train.init_scale = number(tree, "model.init_scale", c.train.init_scale);
  wrap("model", [&] { validate(c.train); return 0; });

  if (const auto s = tree.get_optional<std::string>("foldin.strategies")) {
    c.strategies.clear();
    for (const auto& tag : split_list(*s)) {
      c.strategies.push_back(wrap("foldin.strategies", [&] { return parse_strategy(tag); }));
    }
    if (c.strategies.empty()) throw ConfigError("foldin.strategies is empty");
  }
  for (const auto s : c.strategies) {
    if (!applies_to(s, c.model)) {
      throw ConfigError("strategy '" + std::string(to_string(s)) +
                        "' does not apply to " + std::string(to_string(c.model)) +
                        " models");
    }
  }
  c.sgd.steps = number(tree, "foldin.sgd_steps", c.sgd.steps);
  c.sgd.learning_rate = number(tree, "foldin.sgd_learning_rate", c.sgd.learning_rate);
  c.sgd.mix = number(tree, "foldin.sgd_mix", c.sgd.mix);
  if (const auto i = tree.get_optional<std::string>("foldin.sgd_init")) {
    c.sgd.init = wrap("foldin.sgd_init", [&] { return parse_sgd_init(*i); });
  }
  wrap("foldin", [&] { validate(c.sgd); return 0; });
  c.tune_sgd = boolean(tree, "foldin.tune_sgd", c.tune_sgd);
  c.tune_users = number(tree, "foldin.tune_users", c.tune_users);

  c.ks = numbers(tree, "eval.ks", c.ks);
  for (const auto k : c.ks) {
    if (k == 0) throw ConfigError("eval.ks entries must be positive");
  }

  c.bench.sizes = numbers(tree, "bench.sizes", c.bench.sizes);
  c.bench.rank = number(tree, "bench.rank", c.bench.rank);
  c.bench.trials = number(tree, "bench.trials", c.bench.trials);
  c.bench.sgd_steps = number(tree, "bench.sgd_steps", c.bench.sgd_steps);
  c.bench.history_mean = number(tree, "bench.history_mean", c.bench.history_mean);
  c.bench.zipf_exponent = number(tree, "bench.zipf", c.bench.zipf_exponent);
  c.bench.include_sgd = boolean(tree, "bench.include_sgd", c.bench.include_sgd);
  c.bench.seed = derive_seed(c.seed, "bench");
  return c;
}

// ---------------------------------------------------------------------------
// Artifact chain

using Lineage = std::map<std::string, std::uint64_t>;

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

Lineage read_lineage(const fs::path& dir) {
  std::ifstream in(dir / kLineageFile);
  if (!in) throw DataError("missing " + (dir / kLineageFile).string() + "; run train first");
  Lineage out;
  std::string key;
  std::string value;
  while (in >> key >> value) out[key] = std::stoull(value, nullptr, 16);
  return out;
}

void write_lineage(const fs::path& dir, const Lineage& lineage) {
  std::ofstream out(dir / kLineageFile, std::ios::trunc);
  for (const auto& [key, value] : lineage) out << key << ' ' << hex(value) << '\n';
  if (!out) throw DataError("cannot write " + (dir / kLineageFile).string());
}

std::uint64_t file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.digest();
}

void expect(const Lineage& lineage, const std::string& key, std::uint64_t actual,
            const std::string& what) {
  const auto it = lineage.find(key);
  if (it == lineage.end()) {
    throw FingerprintError(what + " is not recorded in the lineage file");
  }
  if (it->second != actual) {
    throw FingerprintError(what + " fingerprint " + hex(actual) +
                           " does not match recorded " + hex(it->second));
  }
}

struct Prepared {
  InteractionLog log;
  TemporalSplit split;
  SplitManifest manifest;
};

Prepared prepare_data(const RunConfig& c) {
  if (c.dataset.empty()) throw DataError("no dataset configured (data.path)");
  if (!fs::exists(c.dataset)) throw DataError("dataset not found: " + c.dataset.string());
  Prepared p;
  p.log = filter_min_counts(ingest(c.dataset, c.format), c.min_user_count,
                            c.min_item_count);
  p.split = temporal_split(p.log, c.fractions);
  p.manifest = make_manifest(p.split, log_fingerprint(p.log));
  return p;
}

// Re-derives the split and checks it, and the model, against the lineage.
struct Loaded {
  Prepared data;
  EmbeddingModel model;
  std::uint64_t model_checksum = 0;
  Lineage lineage;
};

Loaded load_artifacts(const RunConfig& c) {
  Loaded l;
  l.lineage = read_lineage(c.output);
  l.data = prepare_data(c);
  const auto recorded = read_split_manifest(c.output / kManifestFile);
  if (!(recorded == l.data.manifest)) {
    throw FingerprintError("dataset or split settings differ from " +
                           (c.output / kManifestFile).string());
  }
  expect(l.lineage, "split", file_checksum(c.output / kManifestFile), "split manifest");
  ModelHeader header;
  l.model = load_model(c.output / kModelFile, &header);
  l.model_checksum = header.checksum;
  expect(l.lineage, "model", header.checksum, "model file");
  if (l.model.num_users() != l.data.log.num_users ||
      l.model.num_items() != l.data.log.num_items) {
    throw FingerprintError("model dimensions do not match the dataset");
  }
  return l;
}

std::string foldin_name(Strategy s) { return "foldin_" + std::string(to_string(s)); }

void write_graph_stats(const fs::path& path, const GraphStats& stats,
                       const IdMap* ids) {
  std::ofstream out(path, std::ios::trunc);
  out << "side,index,id,degree,beta\n" << std::setprecision(17);
  for (std::size_t u = 0; u < stats.user_degrees.size(); ++u) {
    out << "user," << u << ',' << (ids ? ids->users[u] : std::to_string(u)) << ','
        << stats.user_degrees[u] << ',';
    if (stats.user_beta_defined(static_cast<UserIndex>(u))) out << stats.user_beta[u];
    out << '\n';
  }
  for (std::size_t i = 0; i < stats.item_degrees.size(); ++i) {
    out << "item," << i << ',' << (ids ? ids->items[i] : std::to_string(i)) << ','
        << stats.item_degrees[i] << ',' << stats.item_beta[i] << '\n';
  }
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

RunConfig config_from_text(const std::string& text,
                           const std::vector<std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_tree(std::move(tree), overrides);
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  if (!path.empty()) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    try {
      pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  return from_tree(std::move(tree), overrides);
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig t = config.train;
  t.seed = derive_seed(config.seed, "train");
  return t;
}

TrainConfig retrain_config(const RunConfig& config) {
  TrainConfig t = config.train;
  t.seed = derive_seed(config.seed, "retrain");
  return t;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const Prepared p = prepare_data(c);
  fs::create_directories(c.output);
  const auto matrix = build_matrix(p.split.train);
  const auto stats = graph_stats(matrix);
  const auto cfg = train_config(c);

  EmbeddingModel model;
  TrainingReport report;
  if (c.model == ModelKind::kUltraGcn) {
    model = train_ultragcn(matrix, stats, cfg, &report);
  } else {
    model = train_puresvd(matrix, cfg.rank, cfg.seed);
  }
  clear_untrained_rows(model);

  write_split_manifest(c.output / kManifestFile, p.manifest);
  const auto checksum = save_model(c.output / kModelFile, model);
  write_graph_stats(c.output / "graph_stats.csv", model.stats, p.log.ids.get());
  if (p.log.ids) write_id_map(c.output, *p.log.ids);
  Lineage lineage;
  lineage["split"] = file_checksum(c.output / kManifestFile);
  lineage["model"] = checksum;
  write_lineage(c.output, lineage);
  fs::remove(c.output / kPlanFile);

  out << "events " << p.log.events.size() << " (train " << p.manifest.train_events
      << ", warm " << p.manifest.warm_events << ", test " << p.manifest.test_events
      << ")\n";
  out << "model " << to_string(model.kind) << " M=" << model.num_users()
      << " N=" << model.num_items() << " d=" << model.rank() << '\n';
  if (!report.epoch_loss.empty()) {
    const auto& loss = report.epoch_loss;
    const auto best = std::min_element(loss.begin(), loss.end());
    out << std::setprecision(6) << "loss first " << loss.front() << " last "
        << loss.back() << " min " << *best << " (epoch "
        << (best - loss.begin()) + 1 << " of " << loss.size() << ")\n";
    out << "train seconds " << std::setprecision(3) << report.seconds << '\n';
  }
  out << "model checksum " << hex(checksum) << '\n';
  return kOk;
}

int cmd_foldin(const RunConfig& c, std::ostream& out) {
  Loaded l = load_artifacts(c);
  const auto& split = l.data.split;
  const EvalContext ctx = make_eval_context(split);
  if (ctx.warm_users.empty()) {
    out << "0 warm users; nothing to fold in\n";
    return kOk;
  }

  SgdFoldInConfig sgd = c.sgd;
  if (c.tune_sgd && std::find(c.strategies.begin(), c.strategies.end(),
                              Strategy::kSgd) != c.strategies.end()) {
    const double lrs[] = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    const double mixes[] = {0.05, 0.1, 0.2, 0.5};
    const auto tuning = tune_sgd(l.model, ctx, split.warm, c.sgd, lrs, mixes,
                                 c.tune_users, derive_seed(c.seed, "tune_sgd"));
    std::ofstream grid(c.output / "sgd_tuning.csv", std::ios::trunc);
    grid << "learning_rate,mix,ndcg@10\n";
    for (const auto& e : tuning.grid) {
      grid << e.learning_rate << ',' << e.mix << ',' << std::fixed
           << std::setprecision(6) << e.ndcg << std::defaultfloat << '\n';
    }
    sgd = tuning.best;
    out << "sgd tuned on " << tuning.users << " users: learning_rate "
        << sgd.learning_rate << " mix " << sgd.mix << '\n';
  }

  std::optional<FoldInPlan> plan;
  const bool wants_linear = std::find(c.strategies.begin(), c.strategies.end(),
                                      Strategy::kLinear) != c.strategies.end();
  double plan_seconds = 0.0;
  if (wants_linear) {
    const auto plan_path = c.output / kPlanFile;
    if (fs::exists(plan_path)) {
      plan = load_plan(plan_path);
      check_plan(*plan, l.model);
      out << "plan loaded from cache\n";
    } else {
      const auto start = std::chrono::steady_clock::now();
      plan = build_plan(l.model);
      plan_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      save_plan(plan_path, *plan);
    }
  }

  std::ofstream per_user(c.output / "foldin.csv", std::ios::trunc);
  per_user << "user_id,strategy,time_ns,embedding_norm\n" << std::setprecision(9);
  std::ofstream timing(c.output / "timing.csv", std::ios::trunc);
  timing << "strategy,users,mean_sec,p50_sec,p99_sec,stddev_sec,plan_build_sec,flagged\n"
         << std::setprecision(9);

  const auto retrain = retrain_config(c);
  for (const auto s : c.strategies) {
    const FoldInRun run = run_foldin(
        l.model, ctx, split, s, sgd, retrain,
        s == Strategy::kLinear ? plan : std::optional<FoldInPlan>{});
    std::vector<double> seconds;
    for (const auto& u : run.users) {
      per_user << (l.data.log.ids ? l.data.log.ids->users[u.user]
                                  : std::to_string(u.user))
               << ',' << to_string(s) << ',' << u.time_ns << ','
               << u.embedding.norm() << '\n';
      seconds.push_back(static_cast<double>(u.time_ns) * 1e-9);
    }
    const auto stats = summarize_timings(std::move(seconds));
    const double build =
        s == Strategy::kLinear ? plan_seconds + run.plan_build_seconds
                               : run.plan_build_seconds;
    timing << to_string(s) << ',' << stats.count << ',' << stats.mean << ','
           << stats.p50 << ',' << stats.p99 << ',' << stats.stddev << ','
           << build << ',' << run.flagged << '\n';

    const auto name = foldin_name(s);
    const auto checksum =
        save_model(c.output / (name + ".wfld"), apply_foldin(l.model, run));
    l.lineage[name] = checksum;
    l.lineage[name + ".source"] = l.model_checksum;
    out << std::left << std::setw(8) << to_string(s) << std::right
        << " users " << stats.count << "  mean " << std::scientific
        << std::setprecision(3) << stats.mean << " s/user" << std::defaultfloat;
    if (run.flagged) out << "  flagged " << run.flagged;
    out << '\n';
  }
  write_lineage(c.output, l.lineage);
  if (!per_user || !timing) throw DataError("cannot write fold-in outputs");
  return kOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const Loaded l = load_artifacts(c);
  const EvalContext ctx = make_eval_context(l.data.split);
  std::vector<MetricRow> rows;
  for (const auto s : c.strategies) {
    const auto name = foldin_name(s);
    const auto path = c.output / (name + ".wfld");
    EmbeddingModel updated;
    if (ctx.warm_users.empty()) {
      updated = l.model;
    } else {
      if (!fs::exists(path)) {
        throw DataError("missing " + path.string() + "; run foldin first");
      }
      ModelHeader header;
      updated = load_model(path, &header);
      expect(l.lineage, name, header.checksum, name + " output");
      expect(l.lineage, name + ".source", l.model_checksum,
             name + " source model");
    }
    rows.push_back(evaluate_model(updated, ctx, c.ks, std::string(to_string(s))));
  }
  std::ofstream csv(c.output / "metrics.csv", std::ios::trunc);
  write_metrics_csv(csv, rows);
  if (!csv) throw DataError("cannot write metrics.csv");
  out << "test users " << ctx.test_users.size() << " (dropped "
      << ctx.dropped_test_users << " without rankable unseen items, "
      << ctx.stateless_test_users << " without history)\n";
  print_metric_table(out, rows);
  return kOk;
}

int cmd_bench(const RunConfig& c, bool fit, std::ostream& out) {
  fs::create_directories(c.output);
  const ScalingTable table = scaling_bench(c.bench);
  std::ofstream csv(c.output / "scaling.csv", std::ios::trunc);
  write_scaling_csv(csv, table);
  if (!csv) throw DataError("cannot write scaling.csv");
  write_scaling_csv(out, table);

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  std::map<std::size_t, std::map<std::string, double>> by_size;
  for (const auto& r : table.rows) {
    series[r.strategy].first.push_back(static_cast<double>(r.num_items));
    series[r.strategy].second.push_back(r.mean);
    by_size[r.num_items][r.strategy] = r.mean;
  }
  for (const auto& [n, means] : by_size) {
    if (means.count("linear") && means.count("sgd")) {
      out << "N=" << n << " sgd/linear time ratio " << std::setprecision(4)
          << means.at("sgd") / means.at("linear") << '\n';
    }
  }
  if (fit) {
    for (const auto& [name, xy] : series) {
      if (xy.first.size() < 2) continue;
      out << "slope " << name << ' ' << std::setprecision(4)
          << loglog_slope(xy.first, xy.second) << '\n';
    }
  }
  if (table.partial) {
    out << "partial output: skipped sizes";
    for (const auto n : table.skipped) out << ' ' << n;
    out << " (insufficient memory)\n";
    return kNumericFailure;
  }
  return kOk;
}

int cmd_inspect(const fs::path& model, std::ostream& out) {
  const ModelHeader h = inspect_model(model);
  out << "magic    " << kModelMagic << '\n'
      << "kind     " << to_string(h.kind) << '\n'
      << "users    " << h.num_users << '\n'
      << "items    " << h.num_items << '\n'
      << "rank     " << h.rank << '\n'
      << "lambda   " << std::setprecision(17) << h.lambda << '\n'
      << "bytes    " << h.file_size << '\n'
      << "checksum " << hex(h.checksum) << '\n';
  return kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"warmfold: fold-in updates for embedding recommenders"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  // Accepted before or after the subcommand name.
  app.fallthrough();
  app.add_option("-c,--config", config_path, "config file");
  app.add_option("-s,--set", overrides, "override, e.g. model.rank=32");
  app.add_option("-o,--output", output, "output directory");
  app.add_option("-d,--dataset", dataset, "dataset path");
  app.add_option("--seed", seed, "master seed");
  auto* train = app.add_subcommand("train", "train a model");
  auto* foldin = app.add_subcommand("foldin", "fold in warm users");
  auto* eval = app.add_subcommand("eval", "evaluate fold-in outputs");
  auto* bench = app.add_subcommand("bench", "fold-in latency scaling benchmark");
  bool fit = false;
  bench->add_flag("--fit", fit, "print fitted log-log slopes");
  auto* inspect = app.add_subcommand("inspect", "print a model file header");
  std::string model_path;
  inspect->add_option("model", model_path, "model file")->required();

  auto* synth = app.add_subcommand("synth", "write a synthetic interaction log");
  std::string synth_kind = "blocks";
  std::string synth_out;
  std::uint64_t synth_seed = 7;
  synth->add_option("kind", synth_kind, "blocks | latent")
      ->check(CLI::IsMember({"blocks", "latent"}));
  synth->add_option("-o,--output", synth_out, "output CSV")->required();
  synth->add_option("--seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*inspect) return cmd_inspect(model_path, out);
    if (*synth) {
      InteractionLog log;
      if (synth_kind == "blocks") {
        synthetic::BlockOptions o;
        o.seed = synth_seed;
        log = synthetic::block_dataset(o).log;
      } else {
        synthetic::LatentOptions o;
        o.seed = synth_seed;
        log = synthetic::latent_log(o);
      }
      std::ofstream f(synth_out, std::ios::trunc);
      f << "user,item,timestamp\n";
      for (const auto& e : log.events) {
        f << log.ids->users[e.user] << ',' << log.ids->items[e.item] << ','
          << e.timestamp << '\n';
      }
      if (!f) throw DataError("cannot write " + synth_out);
      out << "wrote " << log.events.size() << " events to " << synth_out << '\n';
      return kOk;
    }

    if (!output.empty()) overrides.push_back("output=" + output);
    if (!dataset.empty()) overrides.push_back("data.path=" + dataset);
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    const RunConfig config = load_config(config_path, overrides);
    if (*train) return cmd_train(config, out);
    if (*foldin) return cmd_foldin(config, out);
    if (*eval) return cmd_eval(config, out);
    return cmd_bench(config, fit, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FingerprintError& e) {
    err << "fingerprint error: " << e.what() << '\n';
    return kFingerprintFailure;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const std::bad_alloc&) {
    err << "numeric error: out of memory\n";
    return kNumericFailure;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  }
}

}  // namespace warmfold::cli
