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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/lexnorm.hpp"

namespace offnet {
namespace {

// Every spelling reachable by choosing a position subset of size <= max and
// one alternative per chosen position.
std::set<std::string> brute_force_variants(const std::string& word, const SubstitutionMap& subs,
                                           int max_subs) {
  std::set<std::string> out;
  const std::size_t n = word.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) > max_subs) continue;
    std::vector<std::string> partial = {""};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> opts;
      if (mask & (1u << i)) {
        opts = subs.alternatives(word[i]);
      } else {
        opts = {std::string(1, word[i])};
      }
      std::vector<std::string> next;
      for (const auto& p : partial)
        for (const auto& o : opts) next.push_back(p + o);
      partial = std::move(next);
    }
    out.insert(partial.begin(), partial.end());
  }
  return out;
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SubstitutionMap only_s_dollar() {
  SubstitutionMap m;
  m.entries['s'] = {"$"};
  return m;
}

TEST(VariantTable, AssWithDollarOnly) {
  const auto v = enumerate_variants("ass", only_s_dollar(), 3);
  EXPECT_EQ(std::set<std::string>(v.begin(), v.end()),
            (std::set<std::string>{"ass", "a$s", "as$", "a$$"}));
  EXPECT_EQ(v.front(), "ass");
}

TEST(VariantTable, MatchesBruteForceForShortWords) {
  const SubstitutionMap subs = SubstitutionMap::defaults();
  for (const std::string word : {"a", "ok", "ass", "shit", "bitch", "slut", "tits", "hoe"}) {
    for (int k = 0; k <= 5; ++k) {
      const auto v = enumerate_variants(word, subs, k);
      const std::set<std::string> got(v.begin(), v.end());
      EXPECT_EQ(got.size(), v.size()) << word << " has duplicate variants";
      EXPECT_EQ(got, brute_force_variants(word, subs, k)) << word << " k=" << k;
    }
  }
}

TEST(VariantTable, CountFormulaWithUniformAlternatives) {
  // Two single-character alternatives per letter, none of them letters.
  SubstitutionMap subs;
  subs.universal = {"#", "%"};
  const int k = 2;
  for (const std::string word : {"a", "ab", "abc", "abca", "hello"}) {
    const int n = static_cast<int>(word.size());
    for (int max = 0; max <= n; ++max) {
      long long expected = 0;
      for (int j = 0; j <= max; ++j) {
        long long p = 1;
        for (int t = 0; t < j; ++t) p *= k;
        expected += binom(n, j) * p;
      }
      EXPECT_EQ(static_cast<long long>(enumerate_variants(word, subs, max).size()), expected)
          << word << " max=" << max;
    }
  }
}

TEST(VariantTable, CountBoundedByFormulaWithDefaults) {
  const SubstitutionMap subs = SubstitutionMap::defaults();
  std::size_t k = 0;
  for (char c = 'a'; c <= 'z'; ++c) k = std::max(k, subs.alternatives(c).size());
  for (const std::string word : {"fuck", "cunt", "whore", "bitch"}) {
    const int n = static_cast<int>(word.size());
    long long bound = 0;
    for (int j = 0; j <= 3; ++j) {
      long long p = 1;
      for (int t = 0; t < j; ++t) p *= static_cast<long long>(k);
      bound += binom(n, j) * p;
    }
    EXPECT_LE(static_cast<long long>(enumerate_variants(word, subs, 3).size()), bound);
  }
}

TEST(VariantTable, CapStopsExpansion) {
  const auto v = enumerate_variants("motherfucker", SubstitutionMap::defaults(), 12, 1000);
  EXPECT_EQ(v.size(), 1000u);
  EXPECT_EQ(v.front(), "motherfucker");
}

TEST(Lexicon, DefaultContainsPublishedVariants) {
  const auto lex = ObfuscationLexicon::build({"asshole"}, SubstitutionMap::defaults(), 2);
  ASSERT_NE(lex.lookup("a$$hole"), nullptr);
  EXPECT_EQ(*lex.lookup("a$$hole"), "asshole");
  EXPECT_EQ(*lex.lookup("a$sh0le"), "asshole");
  EXPECT_EQ(*lex.lookup("a**hole"), "asshole");
  EXPECT_EQ(*lex.lookup("asshole"), "asshole");
}

TEST(Lexicon, IdentityOnlyWithoutSubstitutions) {
  const auto lex = ObfuscationLexicon::build({"ok"}, SubstitutionMap{}, 2);
  EXPECT_EQ(lex.size(), 1u);
  EXPECT_EQ(*lex.lookup("ok"), "ok");
}

TEST(Lexicon, EmptyIsAnError) {
  try {
    ObfuscationLexicon::build({}, SubstitutionMap::defaults(), 3);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty lexicon");
  }
}

TEST(Lexicon, DuplicatesDroppedAndCollisionsPreferShorter) {
  SubstitutionMap subs;
  subs.entries['a'] = {"e"};
  // "bat" -> "bet" collides with the base word "bet"; "bet" keeps itself.
  const auto lex = ObfuscationLexicon::build({"bat", "bet", "bat", "beta"}, subs, 1);
  EXPECT_EQ(lex.base_words(), (std::vector<std::string>{"bat", "bet", "beta"}));
  EXPECT_EQ(*lex.lookup("bet"), "bet");
  EXPECT_EQ(*lex.lookup("bat"), "bat");
  // "beta" -> "bete": nothing shorter produces it.
  EXPECT_EQ(*lex.lookup("bete"), "beta");
  // Shorter base word wins a shared variant; ties go lexicographic.
  SubstitutionMap subs2;
  subs2.entries['o'] = {"x"};
  subs2.entries['u'] = {"x"};
  const auto lex2 = ObfuscationLexicon::build({"cut", "cot"}, subs2, 1);
  EXPECT_EQ(*lex2.lookup("cxt"), "cot");
}

TEST(Lexicon, EveryVariantMapsToOneCanonicalWord) {
  const auto lex = ObfuscationLexicon::defaults();
  for (const auto& w : lex.base_words()) {
    ASSERT_NE(lex.lookup(w), nullptr);
    EXPECT_EQ(*lex.lookup(w), w);
  }
  for (const auto& [variant, canonical] : lex.variants()) {
    EXPECT_EQ(variant, [&] {
      std::string s = variant;
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    }());
  }
}

TEST(NormalizeToken, Examples) {
  const auto lex = ObfuscationLexicon::defaults();
  EXPECT_EQ(normalize_token("a$$hole", lex), "asshole");
  EXPECT_EQ(normalize_token("hello", lex), "hello");
  EXPECT_EQ(normalize_token("Hello", lex), "Hello");
  SubstitutionMap subs;
  subs.entries['s'] = {"$"};
  subs.entries['o'] = {"0"};
  const auto lex2 = ObfuscationLexicon::build({"asshole"}, subs, 3);
  EXPECT_EQ(normalize_token("A$sh0le", lex2), "asshole");
}

TEST(SubstitutionMap, ParseRoundTrip) {
  const auto d = SubstitutionMap::defaults();
  EXPECT_EQ(SubstitutionMap::parse(d.serialize()), d);
  const auto m = SubstitutionMap::parse("# comment\ns: $,5\n*: *\n\n");
  EXPECT_EQ(m.entries.at('s'), (std::vector<std::string>{"$", "5"}));
  EXPECT_EQ(m.universal, (std::vector<std::string>{"*"}));
  EXPECT_THROW(SubstitutionMap::parse("s $"), DataError);
}

using Tokens = std::vector<std::string>;

TEST(Tokenizer, Examples) {
  EXPECT_EQ(tokenize_tweet("@user you're sick!"), (Tokens{"@user", "you're", "sick", "!"}));
  EXPECT_EQ(tokenize_tweet(""), Tokens{});
  EXPECT_EQ(tokenize_tweet("   \t "), Tokens{});
  EXPECT_EQ(tokenize_tweet("go home #now http://x.co"),
            (Tokens{"go", "home", "#now", "http://x.co"}));
  EXPECT_EQ(tokenize_tweet("you a$$hole"), (Tokens{"you", "a$$hole"}));
  EXPECT_EQ(tokenize_tweet("what a**hole..."), (Tokens{"what", "a**hole", "..."}));
  EXPECT_EQ(tokenize_tweet("lol :) (great)"), (Tokens{"lol", ":)", "(", "great", ")"}));
  EXPECT_EQ(tokenize_tweet("see www.example.com/a?b=c, ok"),
            (Tokens{"see", "www.example.com/a?b=c", ",", "ok"}));
}

std::string strip_space(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "a$$hole", "A$sh0le", "sh1t", "f*ck", "b!tch", "hello", "you", "'re", "I'm", "w/",
      ":)",      ":-(",     "<3",   "@user", "#tag", "http://t.co/x", "!!", "...", ",",
      "(",       ")",       "\"",   "'",     "$",    "*",    "é",  "日本", "x",  "Y", "0"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> gap(0, 3);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    s += pieces[pick(rng)];
    const int g = gap(rng);
    if (g == 1) s += ' ';
    if (g == 2) s += "  \t";
  }
  return s;
}

TEST(Tokenizer, ConservesNonSpaceCharacters) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const std::string s = random_text(rng);
    std::string joined;
    for (const auto& t : tokenize_tweet(s)) {
      EXPECT_FALSE(t.empty());
      joined += t;
    }
    EXPECT_EQ(joined, strip_space(s)) << "input: " << s;
  }
}

TEST(NormalizeText, Examples) {
  const auto lex = ObfuscationLexicon::defaults();
  EXPECT_EQ(normalize_text("you a$$hole", lex), (Tokens{"you", "asshole"}));
  EXPECT_EQ(normalize_text("I'm w/ you", lex, {true, true}), (Tokens{"I", "am", "with", "you"}));
  EXPECT_EQ(normalize_text("clean text", lex), (Tokens{"clean", "text"}));
}

TEST(NormalizeText, IdempotentOnRandomStrings) {
  const auto lex = ObfuscationLexicon::defaults();
  std::mt19937_64 rng(17);
  for (const NormalizeOptions opts : {NormalizeOptions{}, NormalizeOptions{true, true}}) {
    for (int i = 0; i < 1000; ++i) {
      const std::string s = random_text(rng);
      const auto once = normalize_text(s, lex, opts);
      std::string joined;
      for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
      EXPECT_EQ(normalize_text(joined, lex, opts), once) << "input: " << s;
    }
  }
}

TEST(NormalizeText, ChangesOnlyLexiconTokens) {
  const auto lex = ObfuscationLexicon::defaults();
  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; ++i) {
    const std::string s = random_text(rng);
    const auto raw = tokenize_tweet(s);
    const auto norm = normalize_text(s, lex);
    ASSERT_EQ(raw.size(), norm.size());
    for (std::size_t t = 0; t < raw.size(); ++t) {
      if (raw[t] != norm[t]) EXPECT_NE(lex.lookup(raw[t]), nullptr) << raw[t];
    }
  }
}

}  // namespace
}  // namespace offnet
