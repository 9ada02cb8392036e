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

#include "warmfold/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"

namespace warmfold {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line,
                                           std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + sep.size();
  }
  return fields;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

InputFormat detect_format(std::string_view line) {
  if (line.find("::") != std::string_view::npos) return InputFormat::kMovieLens;
  if (line.find('\t') != std::string_view::npos) return InputFormat::kTsv;
  return InputFormat::kCsv;
}

class Compactor {
 public:
  std::uint32_t operator()(std::string_view raw,
                           std::vector<std::string>& names) {
    auto it = index_.find(std::string(raw));
    if (it != index_.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(names.size());
    names.emplace_back(raw);
    index_.emplace(names.back(), idx);
    return idx;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace

InputFormat parse_input_format(std::string_view tag) {
  if (tag == "auto") return InputFormat::kAuto;
  if (tag == "csv") return InputFormat::kCsv;
  if (tag == "tsv") return InputFormat::kTsv;
  if (tag == "movielens") return InputFormat::kMovieLens;
  throw DataError("unknown input format '" + std::string(tag) + "'");
}

std::string_view to_string(InputFormat format) {
  switch (format) {
    case InputFormat::kAuto:
      return "auto";
    case InputFormat::kCsv:
      return "csv";
    case InputFormat::kTsv:
      return "tsv";
    case InputFormat::kMovieLens:
      return "movielens";
  }
  return "auto";
}

InteractionLog parse_interactions(std::istream& in, InputFormat format) {
  auto ids = std::make_shared<IdMap>();
  InteractionLog log;
  Compactor users;
  Compactor items;

  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (format == InputFormat::kAuto) format = detect_format(view);

    std::string_view sep = ",";
    std::size_t ts_field = 2;
    std::size_t min_fields = 3;
    if (format == InputFormat::kTsv) {
      sep = "\t";
    } else if (format == InputFormat::kMovieLens) {
      sep = "::";
      ts_field = 3;
      min_fields = 4;
    }
    const auto fields = split_fields(view, sep);
    if (fields.size() < min_fields) {
      throw ParseError(line_no, "expected " + std::to_string(min_fields) +
                                    " fields, got " +
                                    std::to_string(fields.size()));
    }
    std::int64_t ts = 0;
    if (!parse_int64(fields[ts_field], ts)) {
      if (!seen_data) {  // header
        seen_data = true;
        continue;
      }
      throw ParseError(line_no, "timestamp '" + std::string(fields[ts_field]) +
                                    "' is not an integer");
    }
    seen_data = true;
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "empty user or item identifier");
    }
    Event e;
    e.user = users(fields[0], ids->users);
    e.item = items(fields[1], ids->items);
    e.timestamp = ts;
    log.events.push_back(e);
  }
  if (log.events.empty()) throw EmptyInputError("no interaction records");
  log.num_users = ids->users.size();
  log.num_items = ids->items.size();
  log.ids = std::move(ids);
  return log;
}

InteractionLog ingest(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return parse_interactions(in, format);
  } catch (const EmptyInputError&) {
    throw EmptyInputError("'" + path.string() + "' contains no interactions");
  }
}

InteractionLog filter_min_counts(const InteractionLog& log,
                                 std::size_t min_user_count,
                                 std::size_t min_item_count) {
  std::vector<Event> kept = log.events;
  while (true) {
    std::vector<std::size_t> uc(log.num_users, 0);
    std::vector<std::size_t> ic(log.num_items, 0);
    for (const auto& e : kept) {
      ++uc[e.user];
      ++ic[e.item];
    }
    const auto before = kept.size();
    std::erase_if(kept, [&](const Event& e) {
      return uc[e.user] < min_user_count || ic[e.item] < min_item_count;
    });
    if (kept.size() == before) break;
  }
  if (kept.empty()) throw EmptyInputError("count filters removed every event");

  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> user_map(log.num_users, kUnset);
  std::vector<std::uint32_t> item_map(log.num_items, kUnset);
  auto ids = std::make_shared<IdMap>();
  InteractionLog out;
  out.events.reserve(kept.size());
  for (auto e : kept) {
    if (user_map[e.user] == kUnset) {
      user_map[e.user] = static_cast<std::uint32_t>(ids->users.size());
      ids->users.push_back(log.ids ? log.ids->users[e.user]
                                   : std::to_string(e.user));
    }
    if (item_map[e.item] == kUnset) {
      item_map[e.item] = static_cast<std::uint32_t>(ids->items.size());
      ids->items.push_back(log.ids ? log.ids->items[e.item]
                                   : std::to_string(e.item));
    }
    e.user = user_map[e.user];
    e.item = item_map[e.item];
    out.events.push_back(e);
  }
  out.num_users = ids->users.size();
  out.num_items = ids->items.size();
  out.ids = std::move(ids);
  return out;
}

TemporalSplit temporal_split(const InteractionLog& log,
                             const SplitFractions& fractions) {
  if (log.empty()) throw EmptyInputError("cannot split an empty log");
  if (!(fractions.train > 0.0 && fractions.warm > 0.0 && fractions.test > 0.0)) {
    throw DataError("split fractions must be positive");
  }
  const double total = fractions.train + fractions.warm + fractions.test;
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1");
  }

  std::vector<Event> sorted = log.events;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Event& a, const Event& b) {
                     return a.timestamp < b.timestamp;
                   });
  if (sorted.front().timestamp == sorted.back().timestamp) {
    throw DegenerateSplitError("all events share timestamp " +
                               std::to_string(sorted.front().timestamp));
  }

  const auto n = static_cast<double>(sorted.size());
  auto target = [&](double cumulative) {
    const auto k = static_cast<std::size_t>(std::llround(cumulative * n));
    return std::clamp<std::size_t>(k, 1, sorted.size());
  };
  const Timestamp t1 = sorted[target(fractions.train) - 1].timestamp;
  const Timestamp t2 = std::max(
      t1, sorted[target(fractions.train + fractions.warm) - 1].timestamp);

  TemporalSplit split;
  for (auto* part : {&split.train, &split.warm, &split.test}) {
    part->num_users = log.num_users;
    part->num_items = log.num_items;
    part->ids = log.ids;
  }
  for (const auto& e : sorted) {
    if (e.timestamp <= t1) {
      split.train.events.push_back(e);
    } else if (e.timestamp <= t2) {
      split.warm.events.push_back(e);
    } else {
      split.test.events.push_back(e);
    }
  }
  split.train_end = t1;
  split.warm_end = t2;
  return split;
}

SplitManifest make_manifest(const TemporalSplit& split,
                            std::uint64_t dataset_hash) {
  SplitManifest m;
  m.train_end = split.train_end;
  m.warm_end = split.warm_end;
  m.train_events = split.train.size();
  m.warm_events = split.warm.size();
  m.test_events = split.test.size();
  m.num_users = split.train.num_users;
  m.num_items = split.train.num_items;
  m.dataset_hash = dataset_hash;
  return m;
}

void write_split_manifest(const std::filesystem::path& path,
                          const SplitManifest& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "# warmfold split manifest\n"
      << "train_end " << m.train_end << '\n'
      << "warm_end " << m.warm_end << '\n'
      << "train_events " << m.train_events << '\n'
      << "warm_events " << m.warm_events << '\n'
      << "test_events " << m.test_events << '\n'
      << "num_users " << m.num_users << '\n'
      << "num_items " << m.num_items << '\n'
      << "dataset_hash " << std::hex << m.dataset_hash << std::dec << '\n';
}

SplitManifest read_split_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split manifest '" + path.string() + "'");
  SplitManifest m;
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "train_end") ss >> m.train_end;
    else if (key == "warm_end") ss >> m.warm_end;
    else if (key == "train_events") ss >> m.train_events;
    else if (key == "warm_events") ss >> m.warm_events;
    else if (key == "test_events") ss >> m.test_events;
    else if (key == "num_users") ss >> m.num_users;
    else if (key == "num_items") ss >> m.num_items;
    else if (key == "dataset_hash") ss >> std::hex >> m.dataset_hash;
    else continue;
    if (!ss) throw CorruptFileError("bad manifest entry '" + line + "'");
    ++seen;
  }
  if (seen != 8) throw CorruptFileError("incomplete split manifest");
  return m;
}

void write_id_map(const std::filesystem::path& dir, const IdMap& ids) {
  auto dump = [](const std::filesystem::path& path,
                 const std::vector<std::string>& names) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "index,raw_id\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << i << ',' << names[i] << '\n';
    }
  };
  dump(dir / "users.map.csv", ids.users);
  dump(dir / "items.map.csv", ids.items);
}

std::uint64_t log_fingerprint(const InteractionLog& log) {
  Fnv1a h;
  h.update_value(static_cast<std::uint64_t>(log.num_users));
  h.update_value(static_cast<std::uint64_t>(log.num_items));
  for (const auto& e : log.events) {
    h.update_value(e.user);
    h.update_value(e.item);
    h.update_value(e.timestamp);
  }
  return h.digest();
}

InteractionMatrix::InteractionMatrix(std::size_t rows, std::size_t cols,
                                     std::vector<std::size_t> row_offsets,
                                     std::vector<ItemIndex> column_indices)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      column_indices_(std::move(column_indices)) {
  if (row_offsets_.size() != rows_ + 1 ||
      row_offsets_.back() != column_indices_.size()) {
    throw DimensionError("inconsistent compressed-row arrays");
  }
}

bool InteractionMatrix::contains(UserIndex u, ItemIndex i) const {
  const auto r = row(u);
  return std::binary_search(r.begin(), r.end(), i);
}

std::vector<std::int64_t> InteractionMatrix::row_counts() const {
  std::vector<std::int64_t> counts(rows_);
  for (std::size_t u = 0; u < rows_; ++u) {
    counts[u] = static_cast<std::int64_t>(row_offsets_[u + 1] - row_offsets_[u]);
  }
  return counts;
}

std::vector<std::int64_t> InteractionMatrix::column_counts() const {
  std::vector<std::int64_t> counts(cols_, 0);
  for (const auto i : column_indices_) ++counts[i];
  return counts;
}

InteractionMatrix build_matrix(std::span<const Event> events, std::size_t rows,
                               std::size_t cols) {
  std::vector<std::size_t> offsets(rows + 1, 0);
  for (const auto& e : events) {
    if (e.user >= rows || e.item >= cols) {
      throw DimensionError("event (" + std::to_string(e.user) + ", " +
                           std::to_string(e.item) + ") outside " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    ++offsets[e.user + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<ItemIndex> cols_raw(events.size());
  {
    auto cursor = offsets;
    for (const auto& e : events) cols_raw[cursor[e.user]++] = e.item;
  }
  std::vector<std::size_t> out_offsets(rows + 1, 0);
  std::vector<ItemIndex> out_cols;
  out_cols.reserve(cols_raw.size());
  for (std::size_t u = 0; u < rows; ++u) {
    auto first = cols_raw.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
    auto last = cols_raw.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    out_cols.insert(out_cols.end(), first, last);
    out_offsets[u + 1] = out_cols.size();
  }
  return InteractionMatrix(rows, cols, std::move(out_offsets),
                           std::move(out_cols));
}

InteractionMatrix build_matrix(const InteractionLog& log) {
  return build_matrix(log.events, log.num_users, log.num_items);
}

double user_weight(std::int64_t degree) {
  if (degree <= 0) return std::numeric_limits<double>::quiet_NaN();
  const auto d = static_cast<double>(degree);
  return std::sqrt(d + 1.0) / d;
}

double item_weight(std::int64_t degree) {
  return 1.0 / std::sqrt(static_cast<double>(degree) + 1.0);
}

GraphStats graph_stats(const InteractionMatrix& matrix) {
  GraphStats s;
  s.user_degrees = matrix.row_counts();
  s.item_degrees = matrix.column_counts();
  s.user_beta.resize(s.user_degrees.size());
  s.item_beta.resize(s.item_degrees.size());
  std::transform(s.user_degrees.begin(), s.user_degrees.end(),
                 s.user_beta.begin(), user_weight);
  std::transform(s.item_degrees.begin(), s.item_degrees.end(),
                 s.item_beta.begin(), item_weight);
  return s;
}

MergedHistory merge_for_foldin(const InteractionMatrix& train,
                               const InteractionMatrix& warm, UserIndex user) {
  if (user >= train.rows() || user >= warm.rows()) {
    throw DimensionError("user " + std::to_string(user) + " out of range");
  }
  MergedHistory h;
  h.user = user;
  const auto a = train.row(user);
  const auto b = warm.row(user);
  h.items.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(h.items));
  if (h.items.empty()) {
    throw ColdUserError("user " + std::to_string(user) +
                        " has no interactions; fold-in is undefined");
  }
  h.degree = static_cast<std::int64_t>(h.items.size());
  h.beta = user_weight(h.degree);
  return h;
}

MergedHistory merge_for_foldin(const InteractionMatrix& train,
                               const InteractionLog& warm, UserIndex user) {
  std::vector<Event> mine;
  for (const auto& e : warm.events) {
    if (e.user == user) mine.push_back(e);
  }
  return merge_for_foldin(train, build_matrix(mine, train.rows(), train.cols()),
                          user);
}

std::vector<UserIndex> active_users(const InteractionLog& log) {
  std::vector<UserIndex> users;
  users.reserve(log.events.size());
  for (const auto& e : log.events) users.push_back(e.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  return users;
}

}  // namespace warmfold
