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

#include "core/lexnorm.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

namespace {

bool is_detachable(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '\'': case '"': case '`':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '<': case '>':
      return true;
    default:
      return false;
  }
}

bool is_mention_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

bool is_hashtag_char(char c) {
  return is_mention_char(c) || static_cast<unsigned char>(c) >= 0x80;
}

void validate_replacement(const std::string& alt) {
  if (alt.empty()) throw DataError("substitution map: empty replacement");
  for (char c : alt) {
    if (text::is_space(c)) {
      throw DataError("substitution map: replacement contains whitespace: '" +
                      alt + "'");
    }
  }
}

void push_unique(std::vector<std::string>& v, std::string s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
}

}  // namespace

SubstitutionMap SubstitutionMap::defaults() {
  SubstitutionMap m;
  m.entries = {
      {'a', {"@", "4"}}, {'b', {"8"}},      {'e', {"3"}},
      {'g', {"9"}},      {'i', {"1", "!"}}, {'l', {"1"}},
      {'o', {"0"}},      {'s', {"$", "5"}}, {'t', {"7", "+"}},
  };
  m.universal = {"*"};
  return m;
}

SubstitutionMap SubstitutionMap::parse(std::string_view contents) {
  SubstitutionMap m;
  size_t line_no = 0;
  for (const std::string& raw : text::split(contents, '\n')) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw DataError("substitution map line " + std::to_string(line_no) +
                      ": expected `letter: alt1,alt2`");
    }
    const std::string key = text::ascii_lower(text::trim(line.substr(0, colon)));
    const bool universal = key == "*";
    if (!universal && (key.size() != 1 || key[0] < 'a' || key[0] > 'z')) {
      throw DataError("substitution map line " + std::to_string(line_no) +
                      ": key must be a lowercase letter or '*', got '" + key +
                      "'");
    }
    for (const std::string& piece : text::split(line.substr(colon + 1), ',')) {
      std::string alt = text::ascii_lower(text::trim(piece));
      validate_replacement(alt);
      if (universal) {
        push_unique(m.universal, std::move(alt));
      } else if (alt != key) {
        push_unique(m.entries[key[0]], std::move(alt));
      }
    }
  }
  return m;
}

SubstitutionMap SubstitutionMap::load(const std::string& path) {
  return parse(text::read_file(path));
}

std::string SubstitutionMap::serialize() const {
  std::string out;
  for (const auto& [letter, alts] : entries) {
    if (alts.empty()) continue;
    out.push_back(letter);
    out += ": " + text::join(alts, ",") + "\n";
  }
  if (!universal.empty()) out += "*: " + text::join(universal, ",") + "\n";
  return out;
}

std::vector<std::string> SubstitutionMap::alternatives(char letter) const {
  std::vector<std::string> out;
  if (letter < 'a' || letter > 'z') return out;
  const std::string self(1, letter);
  if (auto it = entries.find(letter); it != entries.end()) {
    for (const auto& alt : it->second) {
      if (alt != self) push_unique(out, alt);
    }
  }
  for (const auto& alt : universal) {
    if (alt != self) push_unique(out, alt);
  }
  return out;
}

std::vector<std::string> default_offensive_words() {
  return {
      "arse",      "ass",        "asshole",    "bastard",   "bitch",
      "bitches",   "bollocks",   "bullshit",   "crap",      "cock",
      "cunt",      "damn",       "dick",       "dickhead",  "douche",
      "douchebag", "dumbass",    "fuck",       "fucked",    "fucker",
      "fucking",   "goddamn",    "hoe",        "idiot",     "idiots",
      "jackass",   "loser",      "moron",      "morons",    "motherfucker",
      "piss",      "pissed",     "prick",      "pussy",     "scum",
      "shit",      "shitty",     "slut",       "stfu",      "stupid",
      "twat",      "wanker",     "whore",
  };
}

std::vector<std::string> load_word_list(const std::string& path) {
  std::vector<std::string> words;
  for (const std::string& raw : text::read_lines(path)) {
    std::string_view line = raw;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = text::trim(line);
    if (!line.empty()) words.emplace_back(line);
  }
  return words;
}

std::vector<std::string> enumerate_variants(const std::string& word,
                                            const SubstitutionMap& subs,
                                            int max_substitutions,
                                            std::size_t cap) {
  std::vector<std::string> out{word};
  std::unordered_set<std::string> seen{word};
  if (cap <= 1) return out;

  std::vector<size_t> candidates;
  std::vector<std::vector<std::string>> options(word.size());
  for (size_t p = 0; p < word.size(); ++p) {
    options[p] = subs.alternatives(word[p]);
    if (!options[p].empty()) candidates.push_back(p);
  }

  const int max_j =
      std::min<int>(max_substitutions, static_cast<int>(candidates.size()));
  for (int j = 1; j <= max_j; ++j) {
    // Combinations of j candidate positions in lexicographic order.
    std::vector<size_t> combo(j);
    for (int k = 0; k < j; ++k) combo[k] = k;
    for (;;) {
      std::vector<size_t> choice(j, 0);
      for (;;) {
        std::string v;
        size_t next = 0;
        for (size_t p = 0; p < word.size(); ++p) {
          if (next < combo.size() && candidates[combo[next]] == p) {
            v += options[p][choice[next]];
            ++next;
          } else {
            v.push_back(word[p]);
          }
        }
        if (seen.insert(v).second) {
          out.push_back(std::move(v));
          if (out.size() >= cap) return out;
        }
        int k = j - 1;
        while (k >= 0 && ++choice[k] == options[candidates[combo[k]]].size()) {
          choice[k] = 0;
          --k;
        }
        if (k < 0) break;
      }
      int k = j - 1;
      while (k >= 0 && combo[k] == candidates.size() - j + k) --k;
      if (k < 0) break;
      ++combo[k];
      for (int m = k + 1; m < j; ++m) combo[m] = combo[m - 1] + 1;
    }
  }
  return out;
}

ObfuscationLexicon ObfuscationLexicon::build(std::vector<std::string> base_words,
                                             const SubstitutionMap& subs,
                                             int max_substitutions,
                                             std::size_t cap) {
  if (max_substitutions < 0) {
    throw UsageError("max_substitutions must be >= 0");
  }
  for (auto& w : base_words) {
    w = text::ascii_lower(text::trim(w));
    if (w.empty()) throw DataError("empty lexicon word");
    for (char c : w) {
      if (text::is_space(c)) {
        throw DataError("lexicon word contains whitespace: '" + w + "'");
      }
    }
    if (is_detachable(w.front()) || is_detachable(w.back())) {
      throw DataError("lexicon word starts or ends with punctuation: '" + w +
                      "'");
    }
  }
  std::sort(base_words.begin(), base_words.end(),
            [](const std::string& a, const std::string& b) {
              return a.size() != b.size() ? a.size() < b.size() : a < b;
            });
  base_words.erase(std::unique(base_words.begin(), base_words.end()),
                   base_words.end());
  if (base_words.empty()) throw DataError("empty lexicon");

  ObfuscationLexicon lex;
  lex.subs_ = subs;
  lex.max_substitutions_ = max_substitutions;
  for (const auto& w : base_words) lex.variants_.emplace(w, w);
  // base_words is ordered by (length, text), so first insertion wins the
  // collision rule.
  for (const auto& w : base_words) {
    for (auto& v : enumerate_variants(w, subs, max_substitutions, cap)) {
      lex.variants_.try_emplace(std::move(v), w);
    }
  }
  lex.base_words_ = std::move(base_words);
  return lex;
}

ObfuscationLexicon ObfuscationLexicon::defaults() {
  return build(default_offensive_words(), SubstitutionMap::defaults());
}

const std::string* ObfuscationLexicon::lookup(std::string_view token) const {
  auto it = variants_.find(text::ascii_lower(token));
  return it == variants_.end() ? nullptr : &it->second;
}

std::string normalize_token(const std::string& token,
                            const ObfuscationLexicon& lexicon) {
  if (const std::string* canonical = lexicon.lookup(token)) return *canonical;
  return token;
}

const std::vector<std::string>& emoticon_table() {
  static const std::vector<std::string> table = {
      ":)",  ":-)", ":(",  ":-(", ";)",   ";-)",  ":D",  ":-D", "XD",  "xD",
      ":P",  ":-P", ":p",  ":-p", ";P",   ";p",   ":o",  ":O",  ":-O", ":-o",
      ":/",  ":-/", ":\\", ":|",  ":-|",  ":*",   ":-*", ":'(", ":')", "<3",
      "</3", "^_^", "^^",  "-_-", "o_O",  "O_o",  "T_T", ";_;", ">:(", ">:-(",
      "D:",  ":]",  ":[",  "=)",  "=(",   "=D",   "8)",  "B)",  ":3",  ":>",
      ":<",  ":@",  ":$",  ":S",  "\\o/", ":'-(",
  };
  return table;
}

namespace {

bool is_emoticon(std::string_view s) {
  const auto& table = emoticon_table();
  return std::find(table.begin(), table.end(), s) != table.end();
}

bool is_url(std::string_view s) {
  return text::starts_with_ci(s, "http://") ||
         text::starts_with_ci(s, "https://") || text::starts_with_ci(s, "www.");
}

// Every emitted token, tokenized again as a chunk, yields itself.
void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  if (chunk.empty()) return;
  if (is_emoticon(chunk)) {
    out.emplace_back(chunk);
    return;
  }
  size_t lead = 0;
  while (lead < chunk.size() && is_detachable(chunk[lead])) ++lead;
  size_t tail = chunk.size();
  while (tail > lead && is_detachable(chunk[tail - 1])) --tail;

  if (lead > 0) out.emplace_back(chunk.substr(0, lead));
  std::string_view core = chunk.substr(lead, tail - lead);
  if (!core.empty()) {
    const bool mention = core.size() > 1 && core[0] == '@' &&
                         is_mention_char(core[1]);
    const bool hashtag = core.size() > 1 && core[0] == '#' &&
                         is_hashtag_char(core[1]);
    if (is_url(core) || is_emoticon(core)) {
      out.emplace_back(core);
    } else if (mention || hashtag) {
      size_t end = 1;
      while (end < core.size() &&
             (mention ? is_mention_char(core[end]) : is_hashtag_char(core[end]))) {
        ++end;
      }
      out.emplace_back(core.substr(0, end));
      tokenize_chunk(core.substr(end), out);
    } else {
      out.emplace_back(core);
    }
  }
  if (tail < chunk.size()) out.emplace_back(chunk.substr(tail));
}

const std::unordered_map<std::string, std::vector<std::string>>&
contraction_table() {
  static const std::unordered_map<std::string, std::vector<std::string>> table = {
      {"i'm", {"I", "am"}},          {"i've", {"I", "have"}},
      {"i'll", {"I", "will"}},       {"i'd", {"I", "would"}},
      {"you're", {"you", "are"}},    {"you've", {"you", "have"}},
      {"you'll", {"you", "will"}},   {"you'd", {"you", "would"}},
      {"he's", {"he", "is"}},        {"she's", {"she", "is"}},
      {"it's", {"it", "is"}},        {"we're", {"we", "are"}},
      {"we've", {"we", "have"}},     {"we'll", {"we", "will"}},
      {"they're", {"they", "are"}},  {"they've", {"they", "have"}},
      {"they'll", {"they", "will"}}, {"that's", {"that", "is"}},
      {"there's", {"there", "is"}},  {"what's", {"what", "is"}},
      {"who's", {"who", "is"}},      {"let's", {"let", "us"}},
      {"isn't", {"is", "not"}},      {"aren't", {"are", "not"}},
      {"wasn't", {"was", "not"}},    {"weren't", {"were", "not"}},
      {"don't", {"do", "not"}},      {"doesn't", {"does", "not"}},
      {"didn't", {"did", "not"}},    {"haven't", {"have", "not"}},
      {"hasn't", {"has", "not"}},    {"hadn't", {"had", "not"}},
      {"won't", {"will", "not"}},    {"wouldn't", {"would", "not"}},
      {"can't", {"can", "not"}},     {"couldn't", {"could", "not"}},
      {"shouldn't", {"should", "not"}}, {"mustn't", {"must", "not"}},
      {"ain't", {"is", "not"}},      {"y'all", {"you", "all"}},
  };
  return table;
}

const std::unordered_map<std::string, std::vector<std::string>>&
abbreviation_table() {
  static const std::unordered_map<std::string, std::vector<std::string>> table = {
      {"w/", {"with"}},
      {"w/o", {"without"}},
      {"u", {"you"}},
      {"ur", {"your"}},
      {"r", {"are"}},
      {"pls", {"please"}},
      {"plz", {"please"}},
      {"thx", {"thanks"}},
      {"b4", {"before"}},
      {"bc", {"because"}},
      {"b/c", {"because"}},
      {"idk", {"I", "do", "not", "know"}},
      {"imo", {"in", "my", "opinion"}},
      {"tbh", {"to", "be", "honest"}},
      {"btw", {"by", "the", "way"}},
      {"omg", {"oh", "my", "god"}},
      {"ppl", {"people"}},
      {"smh", {"shaking", "my", "head"}},
  };
  return table;
}

std::string fold_apostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    // U+2019 RIGHT SINGLE QUOTATION MARK
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return text::ascii_lower(out);
}

void expand_with(const std::unordered_map<std::string, std::vector<std::string>>& table,
                 std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& tok : tokens) {
    auto it = table.find(fold_apostrophes(tok));
    if (it == table.end()) {
      out.push_back(std::move(tok));
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  tokens = std::move(out);
}

}  // namespace

std::vector<std::string> tokenize_tweet(std::string_view text) {
  std::vector<std::string> tokens;
  for (std::string_view chunk : text::split_whitespace(text)) {
    tokenize_chunk(chunk, tokens);
  }
  return tokens;
}

std::vector<std::string> normalize_text(std::string_view text,
                                        const ObfuscationLexicon& lexicon,
                                        const NormalizeOptions& options) {
  std::vector<std::string> tokens = tokenize_tweet(text);
  if (options.expand_contractions) expand_with(contraction_table(), tokens);
  if (options.expand_abbreviations) expand_with(abbreviation_table(), tokens);
  for (auto& tok : tokens) tok = normalize_token(tok, lexicon);
  return tokens;
}

}  // namespace offnet
