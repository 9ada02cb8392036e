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

#include "warmfold/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"

namespace warmfold {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order");

namespace {

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<char>& bytes() { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::size_t limit)
      : bytes_(bytes), limit_(limit) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw CorruptFileError("model file is truncated");
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<char>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr std::size_t kHeaderBytes = 5 + 1 + 3 * 8 + 8;

std::uint64_t payload_bytes(ModelKind kind, std::uint64_t m, std::uint64_t n,
                            std::uint64_t d) {
  std::uint64_t bytes = (m * d + n * d) * 4 + (m + n) * 8 * 2;
  if (kind == ModelKind::kPureSvd) bytes += d * 4;
  return bytes;
}

ModelHeader parse_header(const std::vector<char>& bytes) {
  if (bytes.size() < kHeaderBytes + 8 ||
      std::string_view(bytes.data(), kModelMagic.size()) != kModelMagic) {
    throw CorruptFileError("bad magic: not a warmfold model file");
  }
  Reader r(bytes, bytes.size());
  for (std::size_t k = 0; k < kModelMagic.size(); ++k) r.get<char>();
  ModelHeader h;
  const auto kind = r.get<std::uint8_t>();
  if (kind != 1 && kind != 2) {
    throw CorruptFileError("unknown model kind tag " + std::to_string(kind));
  }
  h.kind = static_cast<ModelKind>(kind);
  h.num_users = r.get<std::uint64_t>();
  h.num_items = r.get<std::uint64_t>();
  h.rank = r.get<std::uint64_t>();
  h.lambda = r.get<double>();
  h.file_size = bytes.size();
  const auto expected =
      kHeaderBytes + payload_bytes(h.kind, h.num_users, h.num_items, h.rank) + 8;
  if (bytes.size() != expected) {
    throw CorruptFileError("model file has " + std::to_string(bytes.size()) +
                           " bytes, header implies " + std::to_string(expected));
  }
  std::memcpy(&h.checksum, bytes.data() + bytes.size() - 8, 8);
  Fnv1a fnv;
  fnv.update(bytes.data(), bytes.size() - 8);
  if (fnv.digest() != h.checksum) {
    throw ChecksumMismatchError("model file checksum mismatch");
  }
  return h;
}

}  // namespace

std::uint64_t save_model(const std::filesystem::path& path,
                         const EmbeddingModel& model) {
  const auto m = model.num_users();
  const auto n = model.num_items();
  const auto d = model.rank();
  Writer w;
  w.put_bytes(kModelMagic);
  w.put(static_cast<std::uint8_t>(model.kind));
  w.put(static_cast<std::uint64_t>(m));
  w.put(static_cast<std::uint64_t>(n));
  w.put(static_cast<std::uint64_t>(d));
  w.put(model.lambda);
  for (Eigen::Index k = 0; k < model.users.size(); ++k)
    w.put(static_cast<float>(model.users.data()[k]));
  for (Eigen::Index k = 0; k < model.items.size(); ++k)
    w.put(static_cast<float>(model.items.data()[k]));
  if (model.kind == ModelKind::kPureSvd) {
    for (Eigen::Index k = 0; k < model.sigma.size(); ++k)
      w.put(static_cast<float>(model.sigma(k)));
  }
  for (const double b : model.stats.user_beta) w.put(b);
  for (const double b : model.stats.item_beta) w.put(b);
  for (const auto deg : model.stats.user_degrees) w.put(deg);
  for (const auto deg : model.stats.item_degrees) w.put(deg);
  Fnv1a fnv;
  fnv.update(w.bytes().data(), w.bytes().size());
  const auto checksum = fnv.digest();
  w.put(checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("short write to '" + path.string() + "'");
  return checksum;
}

ModelHeader inspect_model(const std::filesystem::path& path) {
  return parse_header(read_all(path));
}

EmbeddingModel load_model(const std::filesystem::path& path,
                          ModelHeader* header) {
  const auto bytes = read_all(path);
  const ModelHeader h = parse_header(bytes);
  Reader r(bytes, bytes.size() - 8);
  for (std::size_t k = 0; k < kHeaderBytes; ++k) r.get<char>();

  const auto m = static_cast<Eigen::Index>(h.num_users);
  const auto n = static_cast<Eigen::Index>(h.num_items);
  const auto d = static_cast<Eigen::Index>(h.rank);
  EmbeddingModel model;
  model.kind = h.kind;
  model.lambda = h.lambda;
  model.users.resize(m, d);
  model.items.resize(n, d);
  for (Eigen::Index k = 0; k < model.users.size(); ++k)
    model.users.data()[k] = r.get<float>();
  for (Eigen::Index k = 0; k < model.items.size(); ++k)
    model.items.data()[k] = r.get<float>();
  if (h.kind == ModelKind::kPureSvd) {
    model.sigma.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) model.sigma(k) = r.get<float>();
  }
  auto& s = model.stats;
  s.user_beta.resize(h.num_users);
  s.item_beta.resize(h.num_items);
  s.user_degrees.resize(h.num_users);
  s.item_degrees.resize(h.num_items);
  for (auto& b : s.user_beta) b = r.get<double>();
  for (auto& b : s.item_beta) b = r.get<double>();
  for (auto& deg : s.user_degrees) deg = r.get<std::int64_t>();
  for (auto& deg : s.item_degrees) deg = r.get<std::int64_t>();
  if (header) *header = h;
  return model;
}

void round_to_storage_precision(EmbeddingModel& model) {
  auto round = [](double x) {
    return static_cast<double>(static_cast<float>(x));
  };
  model.users = model.users.unaryExpr(round);
  model.items = model.items.unaryExpr(round);
  model.sigma = model.sigma.unaryExpr(round);
}

}  // namespace warmfold
