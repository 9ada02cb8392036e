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

#include <cmath>
#include <fstream>
#include <iterator>

#include "support.hpp"
#include "warmfold/error.hpp"
#include "warmfold/model_io.hpp"

namespace warmfold {
namespace {

using testing::TempDir;

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

EmbeddingModel sample_model() {
  Rng rng = make_rng(41, "io-test");
  auto m = testing::random_ultragcn(6, 9, 4, rng);
  m.lambda = 1.5;
  m.stats = graph_stats(build_matrix(std::vector<Event>{{0, 1, 0}, {2, 3, 0}}, 6, 9));
  return m;
}

TEST(ModelIo, RoundTrip) {
  TempDir dir;
  auto m = sample_model();
  const auto checksum = save_model(dir.path() / "m.wfld", m);
  ModelHeader h;
  const auto loaded = load_model(dir.path() / "m.wfld", &h);
  round_to_storage_precision(m);
  EXPECT_EQ(loaded.users, m.users);
  EXPECT_EQ(loaded.items, m.items);
  EXPECT_EQ(loaded.stats.user_degrees, m.stats.user_degrees);
  EXPECT_EQ(loaded.stats.item_degrees, m.stats.item_degrees);
  EXPECT_EQ(loaded.stats.item_beta, m.stats.item_beta);
  EXPECT_TRUE(std::isnan(loaded.stats.user_beta[1]));
  EXPECT_EQ(loaded.lambda, 1.5);
  EXPECT_EQ(h.checksum, checksum);
  EXPECT_EQ(h.num_users, 6u);
  EXPECT_EQ(h.num_items, 9u);
  EXPECT_EQ(h.rank, 4u);
  EXPECT_EQ(h.file_size, std::filesystem::file_size(dir.path() / "m.wfld"));
}

TEST(ModelIo, PureSvdSigma) {
  TempDir dir;
  EmbeddingModel m;
  m.kind = ModelKind::kPureSvd;
  m.users = RowMatrix::Ones(2, 2);
  m.items = RowMatrix::Ones(3, 2);
  m.sigma = Vector(2);
  m.sigma << 4.0, 0.25;
  m.stats = graph_stats(build_matrix(std::vector<Event>{{0, 0, 0}}, 2, 3));
  save_model(dir.path() / "p.wfld", m);
  const auto loaded = load_model(dir.path() / "p.wfld");
  EXPECT_EQ(loaded.kind, ModelKind::kPureSvd);
  EXPECT_EQ(loaded.sigma, m.sigma);
}

TEST(ModelIo, SaveIsByteDeterministic) {
  TempDir dir;
  const auto m = sample_model();
  save_model(dir.path() / "a.wfld", m);
  save_model(dir.path() / "b.wfld", m);
  EXPECT_EQ(slurp(dir.path() / "a.wfld"), slurp(dir.path() / "b.wfld"));
  const auto bytes = slurp(dir.path() / "a.wfld");
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 5), "WFLD1");
}

TEST(ModelIo, TruncatedFile) {
  TempDir dir;
  save_model(dir.path() / "m.wfld", sample_model());
  auto bytes = slurp(dir.path() / "m.wfld");
  bytes.resize(bytes.size() - 9);
  spit(dir.path() / "m.wfld", bytes);
  EXPECT_THROW(inspect_model(dir.path() / "m.wfld"), CorruptFileError);
  bytes.resize(3);
  spit(dir.path() / "m.wfld", bytes);
  EXPECT_THROW(load_model(dir.path() / "m.wfld"), CorruptFileError);
}

TEST(ModelIo, TamperedByte) {
  TempDir dir;
  save_model(dir.path() / "m.wfld", sample_model());
  auto bytes = slurp(dir.path() / "m.wfld");
  bytes[bytes.size() / 2] ^= 0x10;
  spit(dir.path() / "m.wfld", bytes);
  EXPECT_THROW(load_model(dir.path() / "m.wfld"), ChecksumMismatchError);
  EXPECT_THROW(inspect_model(dir.path() / "m.wfld"), ChecksumMismatchError);
}

TEST(ModelIo, BadMagic) {
  TempDir dir;
  save_model(dir.path() / "m.wfld", sample_model());
  auto bytes = slurp(dir.path() / "m.wfld");
  bytes[0] = 'X';
  spit(dir.path() / "m.wfld", bytes);
  try {
    inspect_model(dir.path() / "m.wfld");
    FAIL() << "expected CorruptFileError";
  } catch (const ChecksumMismatchError&) {
    FAIL() << "magic must be checked before the checksum";
  } catch (const CorruptFileError&) {
  }
}

TEST(ModelIo, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.wfld"), DataError);
}

}  // namespace
}  // namespace warmfold
