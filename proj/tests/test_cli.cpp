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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "support.hpp"
#include "warmfold/cli.hpp"
#include "warmfold/model_io.hpp"

namespace warmfold {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Result {
  int code = -1;
  std::string output;
};

Result sh(const std::string& args) {
  const std::string cmd = std::string(WARMFOLD_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char* kSmallConfig =
    "seed = 4\n"
    "[model]\nrank = 8\nepochs = 20\nbatch_size = 64\nnegatives = 4\n"
    "learning_rate = 0.02\ninit_scale = 0.1\n"
    "[foldin]\nstrategies = zero,mean,sgd,linear\n"
    "[bench]\nsizes = 1000,10000\ntrials = 10\nrank = 8\nsgd_steps = 10\n";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = dir_.path() / "blocks.csv";
    config_ = dir_.path() / "run.ini";
    std::ofstream(config_) << kSmallConfig;
    ASSERT_EQ(sh("synth blocks -o " + data_.string()).code, 0);
  }
  std::string common(const fs::path& out) const {
    return "-c " + config_.string() + " -d " + data_.string() + " -o " + out.string();
  }
  TempDir dir_;
  fs::path data_;
  fs::path config_;
};

TEST_F(Cli, ToyFileHeaderMatchesData) {
  const auto toy = dir_.path() / "toy.csv";
  {
    std::ofstream f(toy);
    Rng rng = make_rng(1, "cli-toy");
    for (int k = 0; k < 100; ++k) {
      f << "u" << uniform_index(rng, 12) << ",i" << uniform_index(rng, 9) << ',' << k << '\n';
    }
  }
  const auto log = ingest(toy, InputFormat::kAuto);
  const auto out = dir_.path() / "toy";
  ASSERT_EQ(sh("-c " + config_.string() + " -d " + toy.string() + " -o " + out.string() + " train")
                .code,
            0);
  const auto h = inspect_model(out / cli::kModelFile);
  EXPECT_EQ(h.num_users, log.num_users);
  EXPECT_EQ(h.num_items, log.num_items);
  EXPECT_EQ(h.rank, 8u);
  const auto inspect = sh("inspect " + (out / cli::kModelFile).string());
  EXPECT_EQ(inspect.code, 0);
  EXPECT_NE(inspect.output.find("WFLD1"), std::string::npos);
  EXPECT_NE(inspect.output.find("rank     8"), std::string::npos);
}

TEST_F(Cli, FullPipelineIsReproducible) {
  const auto a = dir_.path() / "a";
  const auto b = dir_.path() / "b";
  for (const auto& out : {a, b}) {
    const auto t = sh(common(out) + " train");
    ASSERT_EQ(t.code, 0) << t.output;
    EXPECT_NE(t.output.find("loss first"), std::string::npos);
    const auto f = sh(common(out) + " foldin");
    ASSERT_EQ(f.code, 0) << f.output;
    const auto e = sh(common(out) + " eval");
    ASSERT_EQ(e.code, 0) << e.output;
  }
  EXPECT_EQ(slurp(a / cli::kModelFile), slurp(b / cli::kModelFile));
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(count_lines(slurp(a / "metrics.csv")), 5u);
  EXPECT_EQ(count_lines(slurp(a / "timing.csv")), 5u);
  EXPECT_TRUE(fs::exists(a / "graph_stats.csv"));
  EXPECT_TRUE(fs::exists(a / "users.map.csv"));
  EXPECT_TRUE(fs::exists(a / cli::kManifestFile));
  const auto per_user = slurp(a / "foldin.csv");
  EXPECT_EQ(per_user.substr(0, per_user.find('\n')), "user_id,strategy,time_ns,embedding_norm");
  // Zero leaves the model untouched.
  EXPECT_EQ(slurp(a / "foldin_zero.wfld"), slurp(a / cli::kModelFile));
}

TEST_F(Cli, LinearFasterThanSgdInTimingCsv) {
  const auto out = dir_.path() / "t";
  ASSERT_EQ(sh(common(out) + " train").code, 0);
  ASSERT_EQ(sh(common(out) + " -s foldin.strategies=linear,sgd foldin").code, 0);
  std::istringstream csv(slurp(out / "timing.csv"));
  std::string line;
  std::getline(csv, line);
  std::map<std::string, double> mean;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string name, users, m;
    std::getline(row, name, ',');
    std::getline(row, users, ',');
    std::getline(row, m, ',');
    mean[name] = std::stod(m);
  }
  ASSERT_EQ(mean.size(), 2u);
  EXPECT_LT(mean["linear"], mean["sgd"]);
}

TEST_F(Cli, SingleStrategyEvalGivesOneRow) {
  const auto out = dir_.path() / "s";
  ASSERT_EQ(sh(common(out) + " train").code, 0);
  const std::string only = " -s foldin.strategies=linear ";
  ASSERT_EQ(sh(common(out) + only + "foldin").code, 0);
  const auto e = sh(common(out) + only + "eval");
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(count_lines(slurp(out / "metrics.csv")), 2u);
}

TEST_F(Cli, EmptyWarmSplitIsNoOp) {
  // The train boundary falls inside a timestamp tie that also covers the warm
  // boundary, so every warm-window event is pulled into train.
  const auto tied = dir_.path() / "tied.csv";
  {
    std::ofstream f(tied);
    for (int k = 0; k < 100; ++k) {
      const int t = k < 70 ? k : (k < 90 ? 100 : 200 + k);
      f << "u" << k % 10 << ",i" << (k * 7) % 15 << ',' << t << '\n';
    }
  }
  const auto out = dir_.path() / "w";
  const std::string args =
      "-c " + config_.string() + " -d " + tied.string() + " -o " + out.string();
  ASSERT_EQ(sh(args + " train").code, 0);
  const auto f = sh(args + " foldin");
  EXPECT_EQ(f.code, 0) << f.output;
  EXPECT_NE(f.output.find("0 warm users"), std::string::npos);
}

TEST_F(Cli, FingerprintMismatchesAreFatal) {
  const auto out = dir_.path() / "f";
  ASSERT_EQ(sh(common(out) + " train").code, 0);
  // Different split settings than the ones the model was trained on.
  EXPECT_EQ(sh(common(out) + " -s data.train_fraction=0.7 foldin").code, 4);

  // A cached plan from another model.
  const auto other = dir_.path() / "g";
  ASSERT_EQ(sh(common(other) + " --seed 99 train").code, 0);
  ASSERT_EQ(sh(common(other) + " --seed 99 -s foldin.strategies=linear foldin").code, 0);
  fs::copy_file(other / cli::kPlanFile, out / cli::kPlanFile,
                fs::copy_options::overwrite_existing);
  EXPECT_EQ(sh(common(out) + " -s foldin.strategies=linear foldin").code, 4);

  // Fold-in outputs from a different model.
  fs::remove(out / cli::kPlanFile);
  ASSERT_EQ(sh(common(out) + " -s foldin.strategies=linear foldin").code, 0);
  fs::copy_file(other / "foldin_linear.wfld", out / "foldin_linear.wfld",
                fs::copy_options::overwrite_existing);
  EXPECT_EQ(sh(common(out) + " -s foldin.strategies=linear eval").code, 4);
}

TEST_F(Cli, CorruptModelFile) {
  const auto out = dir_.path() / "c";
  ASSERT_EQ(sh(common(out) + " train").code, 0);
  auto bytes = slurp(out / cli::kModelFile);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(out / cli::kModelFile, std::ios::binary | std::ios::trunc) << bytes;
  const auto r = sh("inspect " + (out / cli::kModelFile).string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("checksum"), std::string::npos);
  bytes.resize(10);
  std::ofstream(out / cli::kModelFile, std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_EQ(sh("inspect " + (out / cli::kModelFile).string()).code, 2);
}

TEST_F(Cli, BenchWritesScalingCsv) {
  const auto out = dir_.path() / "bench";
  const auto r = sh(common(out) + " bench --fit");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(count_lines(slurp(out / "scaling.csv")), 5u);
  EXPECT_NE(r.output.find("slope linear"), std::string::npos);
  EXPECT_NE(r.output.find("sgd/linear time ratio"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(sh("").code, 1);
  EXPECT_EQ(sh("frobnicate").code, 1);
  EXPECT_EQ(sh("train -s model.rank=abc -d " + data_.string()).code, 1);
  EXPECT_EQ(sh("train -s nosuch.key=1 -d " + data_.string()).code, 1);
  EXPECT_EQ(sh("train -s foldin.strategies=svd -d " + data_.string()).code, 1);
  EXPECT_EQ(sh("train -o " + (dir_.path() / "x").string() + " -d /nonexistent.csv").code, 2);
  EXPECT_EQ(sh("inspect /nonexistent.wfld").code, 2);
  EXPECT_EQ(sh("--help").code, 0);
}

TEST(Config, ParsesSectionsAndOverrides) {
  const auto c = cli::config_from_text(
      "seed = 12\noutput = out\n[data]\npath = x.csv\nformat = movielens\n"
      "train_fraction = 0.7\nwarm_fraction = 0.2\n[model]\nkind = puresvd\nrank = 16\n"
      "[foldin]\nstrategies = zero, svd\n[eval]\nks = 1,5,20\n[bench]\nsizes = 1e3,1e4\n",
      {"model.rank=24"});
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.format, InputFormat::kMovieLens);
  EXPECT_EQ(c.model, ModelKind::kPureSvd);
  EXPECT_EQ(c.train.rank, 24u);
  EXPECT_NEAR(c.fractions.test, 0.1, 1e-12);
  EXPECT_EQ(c.strategies, (std::vector<Strategy>{Strategy::kZero, Strategy::kSvd}));
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{1, 5, 20}));
  EXPECT_EQ(c.bench.sizes, (std::vector<std::size_t>{1000, 10000}));
  EXPECT_THROW(cli::config_from_text("[model]\nrank = -3\n", {}), cli::ConfigError);
  EXPECT_THROW(cli::config_from_text("[data]\ntrain_fraction = 0.95\nwarm_fraction = 0.1\n", {}),
               cli::ConfigError);
  // Seeds fan out per consumer.
  EXPECT_NE(cli::train_config(c).seed, cli::retrain_config(c).seed);
}

}  // namespace
}  // namespace warmfold
