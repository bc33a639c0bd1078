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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace offnet {

inline constexpr std::int32_t kPadIndex = 0;
inline constexpr std::int32_t kUnkIndex = 1;
inline constexpr std::int32_t kFirstCharIndex = 2;
inline constexpr std::size_t kDefaultCharVocabSize = 256;
inline constexpr std::size_t kMaxWordLenCap = 32;

using TokenList = std::vector<std::string>;

// Frequency-ranked character table. Characters are Unicode code points; the
// most frequent maps to index 2, ties go to the smaller code point.
class CharVocabulary {
 public:
  CharVocabulary() = default;

  static CharVocabulary build(const std::vector<TokenList>& corpus,
                              std::size_t size = kDefaultCharVocabSize);

  std::int32_t index_of(char32_t cp) const;
  std::size_t size() const { return chars_.size(); }
  const std::vector<char32_t>& chars() const { return chars_; }

  // `index<TAB>codepoint-hex` per line.
  std::string serialize() const;
  static CharVocabulary parse(std::string_view contents);

  bool operator==(const CharVocabulary& o) const { return chars_ == o.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::int32_t> index_;
};

// Pretrained word vectors. Lookup tries the exact token, then its ASCII
// lowercase form; anything else gets the zero vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = 0)
      : dim_(dim), zeros_(static_cast<std::size_t>(dim > 0 ? dim : 0), 0.0f) {}

  // Text format with an optional `count dim` first line. `limit` caps the
  // number of vector rows read. When `keep` is given, only rows whose token
  // is in it are stored.
  static EmbeddingTable load(const std::string& path,
                             std::optional<std::size_t> limit = std::nullopt,
                             const std::unordered_set<std::string>* keep = nullptr);
  static EmbeddingTable parse(std::string_view contents,
                              std::optional<std::size_t> limit = std::nullopt,
                              const std::unordered_set<std::string>* keep = nullptr);

  void add(const std::string& token, std::span<const float> vec);
  std::span<const float> lookup(std::string_view token) const;
  bool contains(std::string_view token) const;

  int dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

 private:
  int dim_;
  std::vector<float> data_;
  std::vector<float> zeros_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Tokens plus the set of strings an EmbeddingTable needs to resolve them.
std::unordered_set<std::string> embedding_keys(const std::vector<TokenList>& corpus);

struct TokenizedExample {
  TokenList tokens;
  int label = -1;  // class index, -1 when unlabeled
};

struct EncodedBatch {
  std::size_t batch = 0;
  std::size_t max_words = 0;
  std::size_t max_word_len = 0;
  std::size_t dim = 0;
  std::vector<std::int32_t> char_indices;  // [batch, max_words, max_word_len]
  std::vector<float> word_vectors;         // [batch, max_words, dim]
  std::vector<std::uint8_t> word_mask;     // [batch, max_words]
  std::vector<int> labels;                 // [batch] or empty
  std::vector<std::string> warnings;

  std::span<const std::int32_t> chars_of(std::size_t b, std::size_t w) const {
    return {char_indices.data() + (b * max_words + w) * max_word_len, max_word_len};
  }
  std::span<const float> vector_of(std::size_t b, std::size_t w) const {
    return {word_vectors.data() + (b * max_words + w) * dim, dim};
  }
  bool has_word(std::size_t b, std::size_t w) const {
    return word_mask[b * max_words + w] != 0;
  }
  std::size_t word_count(std::size_t b) const;
};

// Row-major [max_words, max_word_len] grid of character indices.
std::vector<std::int32_t> encode_chars(const TokenList& tokens,
                                       const CharVocabulary& vocab,
                                       std::size_t max_word_len,
                                       std::size_t max_words);

// Longest token (in code points), capped, rounded up to a multiple of
// `multiple_of` so the pooling stack divides it evenly.
std::size_t default_max_word_len(const std::vector<TokenList>& corpus,
                                 std::size_t cap = kMaxWordLenCap,
                                 std::size_t multiple_of = 4);

// max_words is the longest example in the batch. An example with no tokens is
// encoded as one unknown word and noted in `warnings`.
EncodedBatch make_batch(std::span<const TokenizedExample> examples,
                        const CharVocabulary& vocab, const EmbeddingTable& table,
                        std::size_t max_word_len);

}  // namespace offnet
