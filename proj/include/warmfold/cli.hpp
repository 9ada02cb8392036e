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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "warmfold/data.hpp"
#include "warmfold/error.hpp"
#include "warmfold/eval.hpp"
#include "warmfold/foldin.hpp"
#include "warmfold/model.hpp"

namespace warmfold::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataFailure = 2,
  kNumericFailure = 3,
  kFingerprintFailure = 4,
};

// Thrown for malformed configuration values; maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::filesystem::path dataset;
  InputFormat format = InputFormat::kAuto;
  std::size_t min_user_count = 0;
  std::size_t min_item_count = 0;
  SplitFractions fractions;

  ModelKind model = ModelKind::kUltraGcn;
  TrainConfig train;

  std::vector<Strategy> strategies{Strategy::kZero, Strategy::kMean,
                                   Strategy::kSgd, Strategy::kLinear};
  SgdFoldInConfig sgd;
  bool tune_sgd = false;
  std::size_t tune_users = 500;

  std::vector<std::size_t> ks{5, 10};
  ScalingOptions bench;

  std::filesystem::path output = "warmfold-out";
  std::uint64_t seed = 0;
};

// INI-style text: top-level `key = value` lines plus [section] blocks.
// Overrides are `section.key=value` strings applied after the file.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides);
RunConfig config_from_text(const std::string& text,
                           const std::vector<std::string>& overrides);

// Seeds for each consumer are derived from RunConfig::seed by stream name.
TrainConfig train_config(const RunConfig& config);
TrainConfig retrain_config(const RunConfig& config);

// Artifact names inside the output directory.
inline constexpr const char* kModelFile = "model.wfld";
inline constexpr const char* kPlanFile = "plan.wfpln";
inline constexpr const char* kManifestFile = "split.manifest";
inline constexpr const char* kLineageFile = "lineage.txt";

int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_foldin(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, bool fit, std::ostream& out);
int cmd_inspect(const std::filesystem::path& model, std::ostream& out);

// Full command line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace warmfold::cli
