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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace offnet {

enum class LabelA { kNot = 0, kOff = 1 };
enum class LabelB { kTin = 0, kUnt = 1 };
enum class Source { kOlid, kToxic };
enum class Subtask { kA, kB };

// Class names in output order: (NOT, OFF) for A, (TIN, UNT) for B.
const std::vector<std::string>& class_names(Subtask t);
std::optional<Subtask> parse_subtask(std::string_view s);

std::string_view to_string(LabelA l);
std::string_view to_string(LabelB l);
std::string_view to_string(Source s);
std::optional<LabelA> parse_label_a(std::string_view s);
std::optional<LabelB> parse_label_b(std::string_view s);

struct LabeledExample {
  std::string id;
  std::string text;
  LabelA label_a = LabelA::kNot;
  std::optional<LabelB> label_b;  // only on OFF rows
  Source source = Source::kOlid;

  bool operator==(const LabeledExample&) const = default;
};

inline constexpr std::array<std::string_view, 6> kToxicFlagNames = {
    "toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"};

struct ToxicRow {
  std::string id;
  std::string comment_text;
  std::array<std::uint8_t, 6> flags{};  // order of kToxicFlagNames

  bool operator==(const ToxicRow&) const = default;
};

struct DataSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultDataSeed = 5;

// Published corpus sizes used by the reproduction recipe.
inline constexpr std::size_t kOlidTrainSize = 13240;
inline constexpr std::size_t kOlidTrainSplit = 12000;
inline constexpr std::size_t kOlidValidationSplit = 1240;
inline constexpr std::size_t kToxicMappedSize = 109236;
inline constexpr std::size_t kToxicNotRemoved = 84626;
inline constexpr std::size_t kToxicPerClassAdded = 12305;

// OLID training TSV: header `id tweet subtask_a subtask_b subtask_c`.
std::vector<LabeledExample> parse_olid(std::string_view contents);
std::vector<LabeledExample> load_olid(const std::string& path);
std::string format_olid(const std::vector<LabeledExample>& examples);

// Toxic-Comments CSV with quoted, possibly multi-line comment fields.
std::vector<ToxicRow> parse_toxic_comments(std::string_view contents);
std::vector<ToxicRow> load_toxic_comments(const std::string& path);
std::string format_toxic_comments(const std::vector<ToxicRow>& rows);

// RFC 4180 records. Quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view contents);

// OFF when toxic or severe_toxic is set, NOT when no flag is set; every other
// row is dropped.
std::vector<LabeledExample> map_toxic_labels(const std::vector<ToxicRow>& rows);

// Drops NOT examples uniformly at random until the classes are even.
// Survivors keep their input order.
std::vector<LabeledExample> balance(const std::vector<LabeledExample>& examples,
                                    std::uint64_t seed);

DataSplit split(std::vector<LabeledExample> examples, std::size_t n_train,
                std::size_t n_val, std::uint64_t seed);

std::vector<LabeledExample> build_subtask_b_view(
    const std::vector<LabeledExample>& examples);

// Class index of `ex` for `t`: NOT=0/OFF=1 or TIN=0/UNT=1. Throws DataError
// when a subtask B label is requested from an example without one.
int class_index(const LabeledExample& ex, Subtask t);

// Prepared dataset: `id<TAB>label_a<TAB>label_b<TAB>text`, '-' for a missing
// label_b. Text is backslash-escaped so records stay on one line.
std::string format_prepared(const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> parse_prepared(std::string_view contents);
void write_prepared(const std::string& path,
                    const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> load_prepared(const std::string& path);

struct TextRecord {
  std::string id;
  std::string text;
};

// Unlabeled TSV with a header containing `id` and `tweet` (or `text`)
// columns, as distributed for OLID test sets.
std::vector<TextRecord> load_text_records(const std::string& path);

}  // namespace offnet
