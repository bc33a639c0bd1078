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

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace offnet {

// Visually-equivalent replacements per lowercase letter. `universal` holds
// replacements that apply to every letter (the '*' mask by default). The
// identity substitution is implicit and never stored.
struct SubstitutionMap {
  std::map<char, std::vector<std::string>> entries;
  std::vector<std::string> universal;

  static SubstitutionMap defaults();

  // Lines of the form `letter: alt1,alt2`. A `*` key declares universal
  // replacements. Lines starting with '#' are comments.
  static SubstitutionMap parse(std::string_view contents);
  static SubstitutionMap load(const std::string& path);
  std::string serialize() const;

  // Distinct replacements for `letter`, specific ones first.
  std::vector<std::string> alternatives(char letter) const;

  bool operator==(const SubstitutionMap&) const = default;
};

inline constexpr int kDefaultMaxSubstitutions = 3;
inline constexpr std::size_t kVariantCapPerWord = 50000;

std::vector<std::string> default_offensive_words();

// One lowercase word per line; '#' starts a comment.
std::vector<std::string> load_word_list(const std::string& path);

// Enumerates the obfuscated spellings of `word` reachable by substituting
// between 1 and `max_substitutions` letter positions, identity included.
// Generation proceeds by increasing substitution count and stops once `cap`
// distinct variants exist.
std::vector<std::string> enumerate_variants(const std::string& word,
                                            const SubstitutionMap& subs,
                                            int max_substitutions,
                                            std::size_t cap = kVariantCapPerWord);

class ObfuscationLexicon {
 public:
  // Throws DataError("empty lexicon") when no base words are given. Duplicate
  // base words are dropped. A variant produced by two base words resolves to
  // the shorter word, then the lexicographically smaller one; a base word
  // always resolves to itself.
  static ObfuscationLexicon build(std::vector<std::string> base_words,
                                  const SubstitutionMap& subs,
                                  int max_substitutions = kDefaultMaxSubstitutions,
                                  std::size_t cap = kVariantCapPerWord);

  static ObfuscationLexicon defaults();

  // Case-insensitive. Returns nullptr when `token` is not a known variant.
  const std::string* lookup(std::string_view token) const;

  const std::vector<std::string>& base_words() const { return base_words_; }
  const SubstitutionMap& substitutions() const { return subs_; }
  int max_substitutions() const { return max_substitutions_; }
  std::size_t size() const { return variants_.size(); }
  const std::unordered_map<std::string, std::string>& variants() const {
    return variants_;
  }

 private:
  std::vector<std::string> base_words_;
  SubstitutionMap subs_;
  int max_substitutions_ = 0;
  std::unordered_map<std::string, std::string> variants_;
};

std::string normalize_token(const std::string& token,
                            const ObfuscationLexicon& lexicon);

const std::vector<std::string>& emoticon_table();

std::vector<std::string> tokenize_tweet(std::string_view text);

struct NormalizeOptions {
  bool expand_contractions = false;
  bool expand_abbreviations = false;
};

// tokenize_tweet, then optional contraction/abbreviation expansion, then
// per-token lexicon lookup.
std::vector<std::string> normalize_text(std::string_view text,
                                        const ObfuscationLexicon& lexicon,
                                        const NormalizeOptions& options = {});

}  // namespace offnet
