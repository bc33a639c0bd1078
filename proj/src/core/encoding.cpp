// Copyright (c) 2026 The offnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

CharVocabulary CharVocabulary::build(const std::vector<TokenList>& corpus,
                                     std::size_t size) {
  if (corpus.empty()) throw DataError("character vocabulary: empty corpus");
  std::map<char32_t, std::uint64_t> freq;
  for (const auto& tokens : corpus) {
    for (const auto& tok : tokens) {
      for (char32_t cp : text::decode_utf8(tok)) ++freq[cp];
    }
  }
  std::vector<std::pair<char32_t, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  CharVocabulary v;
  for (size_t i = 0; i < ranked.size() && i < size; ++i) {
    v.index_.emplace(ranked[i].first, kFirstCharIndex + static_cast<std::int32_t>(i));
    v.chars_.push_back(ranked[i].first);
  }
  return v;
}

std::int32_t CharVocabulary::index_of(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kUnkIndex : it->second;
}

std::string CharVocabulary::serialize() const {
  std::string out;
  char buf[32];
  for (size_t i = 0; i < chars_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%04X\n",
                  i + static_cast<size_t>(kFirstCharIndex),
                  static_cast<unsigned>(chars_[i]));
    out += buf;
  }
  return out;
}

CharVocabulary CharVocabulary::parse(std::string_view contents) {
  CharVocabulary v;
  size_t line_no = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2) {
      throw DataError("char vocabulary line " + std::to_string(line_no) +
                      ": expected `index<TAB>codepoint-hex`");
    }
    long idx = 0;
    unsigned long cp = 0;
    auto r1 = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), idx);
    auto r2 = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), cp, 16);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
        idx != kFirstCharIndex + static_cast<long>(v.chars_.size())) {
      throw DataError("char vocabulary line " + std::to_string(line_no) +
                      ": malformed or out-of-order entry");
    }
    v.index_.emplace(static_cast<char32_t>(cp), static_cast<std::int32_t>(idx));
    v.chars_.push_back(static_cast<char32_t>(cp));
  }
  return v;
}

namespace {

bool parse_float(std::string_view s, float& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, size_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Shared by load() and parse(); `next_line` yields false at end of input.
template <typename NextLine>
EmbeddingTable read_table(NextLine&& next_line, std::optional<std::size_t> limit,
                          const std::unordered_set<std::string>* keep) {
  std::string line;
  size_t line_no = 0;
  int dim = -1;
  size_t rows = 0;
  EmbeddingTable table;
  std::vector<float> vec;
  while (next_line(line)) {
    ++line_no;
    auto f = fields(line);
    if (f.empty()) continue;
    if (line_no == 1 && f.size() == 2) {
      size_t count = 0, d = 0;
      if (parse_size(f[0], count) && parse_size(f[1], d)) {
        dim = static_cast<int>(d);
        table = EmbeddingTable(dim);
        continue;
      }
    }
    if (limit && rows >= *limit) break;
    if (dim < 0) {
      dim = static_cast<int>(f.size()) - 1;
      if (dim <= 0) {
        throw DataError("embedding file line " + std::to_string(line_no) +
                        ": no vector components");
      }
      table = EmbeddingTable(dim);
    }
    if (static_cast<int>(f.size()) - 1 != dim) {
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": expected " + std::to_string(dim) + " components, got " +
                      std::to_string(f.size() - 1));
    }
    ++rows;
    std::string token(f[0]);
    if (keep && !keep->count(token)) continue;
    vec.resize(dim);
    for (int k = 0; k < dim; ++k) {
      if (!parse_float(f[k + 1], vec[k])) {
        throw DataError("embedding file line " + std::to_string(line_no) +
                        ": bad number '" + std::string(f[k + 1]) + "'");
      }
    }
    table.add(token, vec);
  }
  if (dim < 0) throw DataError("embedding file: no vectors");
  return table;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::string& path,
                                    std::optional<std::size_t> limit,
                                    const std::unordered_set<std::string>* keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file: " + path);
  return read_table([&](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
                    limit, keep);
}

EmbeddingTable EmbeddingTable::parse(std::string_view contents,
                                     std::optional<std::size_t> limit,
                                     const std::unordered_set<std::string>* keep) {
  size_t pos = 0;
  return read_table(
      [&](std::string& line) {
        if (pos >= contents.size()) return false;
        size_t nl = contents.find('\n', pos);
        if (nl == std::string_view::npos) nl = contents.size();
        line.assign(contents.substr(pos, nl - pos));
        pos = nl + 1;
        return true;
      },
      limit, keep);
}

void EmbeddingTable::add(const std::string& token, std::span<const float> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw DataError("embedding for '" + token + "' has wrong dimension");
  }
  if (index_.count(token)) return;
  index_.emplace(token, data_.size());
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::span<const float> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) it = index_.find(text::ascii_lower(token));
  if (it == index_.end()) return {zeros_.data(), zeros_.size()};
  return {data_.data() + it->second, static_cast<size_t>(dim_)};
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.count(std::string(token)) ||
         index_.count(text::ascii_lower(token));
}

std::unordered_set<std::string> embedding_keys(const std::vector<TokenList>& corpus) {
  std::unordered_set<std::string> keys;
  for (const auto& tokens : corpus) {
    for (const auto& t : tokens) {
      keys.insert(t);
      keys.insert(text::ascii_lower(t));
    }
  }
  return keys;
}

std::size_t EncodedBatch::word_count(std::size_t b) const {
  std::size_t n = 0;
  for (std::size_t w = 0; w < max_words; ++w) n += word_mask[b * max_words + w];
  return n;
}

std::vector<std::int32_t> encode_chars(const TokenList& tokens,
                                       const CharVocabulary& vocab,
                                       std::size_t max_word_len,
                                       std::size_t max_words) {
  std::vector<std::int32_t> out(max_words * max_word_len, kPadIndex);
  const size_t n = std::min(tokens.size(), max_words);
  for (size_t w = 0; w < n; ++w) {
    const auto cps = text::decode_utf8(tokens[w]);
    const size_t len = std::min(cps.size(), max_word_len);
    for (size_t c = 0; c < len; ++c) out[w * max_word_len + c] = vocab.index_of(cps[c]);
  }
  return out;
}

std::size_t default_max_word_len(const std::vector<TokenList>& corpus,
                                 std::size_t cap, std::size_t multiple_of) {
  size_t longest = 1;
  for (const auto& tokens : corpus) {
    for (const auto& t : tokens) {
      longest = std::max(longest, text::decode_utf8(t).size());
    }
  }
  size_t len = std::min(longest, cap);
  if (multiple_of > 1) len = (len + multiple_of - 1) / multiple_of * multiple_of;
  return len;
}

EncodedBatch make_batch(std::span<const TokenizedExample> examples,
                        const CharVocabulary& vocab, const EmbeddingTable& table,
                        std::size_t max_word_len) {
  if (examples.empty()) throw UsageError("make_batch: no examples");
  if (max_word_len == 0) throw UsageError("make_batch: max_word_len must be >= 1");
  EncodedBatch b;
  b.batch = examples.size();
  b.max_word_len = max_word_len;
  b.dim = static_cast<size_t>(table.dim());
  for (const auto& ex : examples) b.max_words = std::max(b.max_words, ex.tokens.size());
  b.max_words = std::max<size_t>(b.max_words, 1);

  b.char_indices.assign(b.batch * b.max_words * max_word_len, kPadIndex);
  b.word_vectors.assign(b.batch * b.max_words * b.dim, 0.0f);
  b.word_mask.assign(b.batch * b.max_words, 0);
  bool labeled = std::all_of(examples.begin(), examples.end(),
                             [](const TokenizedExample& e) { return e.label >= 0; });
  if (labeled) b.labels.reserve(b.batch);

  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (labeled) b.labels.push_back(ex.label);
    if (ex.tokens.empty()) {
      b.char_indices[i * b.max_words * max_word_len] = kUnkIndex;
      b.word_mask[i * b.max_words] = 1;
      b.warnings.push_back("example " + std::to_string(i) +
                           " has no tokens; encoded as one unknown word");
      continue;
    }
    auto grid = encode_chars(ex.tokens, vocab, max_word_len, b.max_words);
    std::copy(grid.begin(), grid.end(),
              b.char_indices.begin() + i * b.max_words * max_word_len);
    for (size_t w = 0; w < ex.tokens.size(); ++w) {
      b.word_mask[i * b.max_words + w] = 1;
      auto v = table.lookup(ex.tokens[w]);
      std::copy(v.begin(), v.end(),
                b.word_vectors.begin() + (i * b.max_words + w) * b.dim);
    }
  }
  return b;
}

}  // namespace offnet
