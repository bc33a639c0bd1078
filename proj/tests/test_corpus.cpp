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

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/text_util.hpp"
#include "test_support.hpp"

namespace offnet {
namespace {

const char* kOlidHeader = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n";

TEST(Olid, ParsesHierarchicalLabels) {
  const auto xs = parse_olid(std::string(kOlidHeader) +
                             "1\t@USER you suck\tOFF\tTIN\tIND\n"
                             "2\twhat the hell\tOFF\tUNT\tNULL\n"
                             "3\tnice day\tNOT\tNULL\tNULL\n");
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_EQ(xs[0].label_b, LabelB::kTin);
  EXPECT_EQ(xs[1].label_b, LabelB::kUnt);
  EXPECT_FALSE(xs[2].label_b.has_value());
  EXPECT_EQ(xs[2].label_a, LabelA::kNot);
  EXPECT_EQ(xs[0].text, "@USER you suck");
}

TEST(Olid, HeaderOnlyIsEmpty) { EXPECT_TRUE(parse_olid(kOlidHeader).empty()); }

TEST(Olid, ErrorsNameTheProblem) {
  try {
    parse_olid(std::string(kOlidHeader) + "1\tok\tNOT\tNULL\tNULL\n2\tbad row\tNOT\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_olid(std::string(kOlidHeader) + "1\tok\tMEH\tNULL\tNULL\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("MEH"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_olid("id\ttext\n"), DataError);
}

TEST(Olid, FormatRoundTrip) {
  const std::string s = std::string(kOlidHeader) + "1\ta\tOFF\tTIN\tNULL\n2\tb\tNOT\tNULL\tNULL\n";
  EXPECT_EQ(parse_olid(format_olid(parse_olid(s))), parse_olid(s));
}

const char* kToxicHeader =
    "id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate\n";

TEST(Toxic, ParsesFlagsAndQuotedText) {
  const auto rows = parse_toxic_comments(std::string(kToxicHeader) +
                                         "a1,\"hello, world\",0,0,0,0,0,0\n"
                                         "a2,\"you \"\"fool\"\"\nsecond line\",1,0,0,0,0,0\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].comment_text, "hello, world");
  EXPECT_EQ(rows[0].flags, (std::array<std::uint8_t, 6>{0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(rows[1].comment_text, "you \"fool\"\nsecond line");
  EXPECT_EQ(rows[1].flags[0], 1);
  EXPECT_TRUE(parse_toxic_comments(kToxicHeader).empty());
  EXPECT_THROW(parse_toxic_comments(std::string(kToxicHeader) + "a,b,2,0,0,0,0,0\n"), DataError);
  EXPECT_THROW(parse_toxic_comments(std::string(kToxicHeader) + "a,b,0,0\n"), DataError);
}

std::vector<ToxicRow> all_flag_combinations() {
  std::vector<ToxicRow> rows;
  for (int m = 0; m < 64; ++m) {
    ToxicRow r;
    r.id = "c" + std::to_string(m);
    r.comment_text = "comment " + std::to_string(m);
    for (int f = 0; f < 6; ++f) r.flags[f] = static_cast<std::uint8_t>((m >> f) & 1);
    rows.push_back(r);
  }
  return rows;
}

TEST(Toxic, MappingMatchesRuleOnAllCombinations) {
  const auto rows = all_flag_combinations();
  std::set<std::string> want_off, want_not;
  for (const auto& r : rows) {
    const bool any = std::any_of(r.flags.begin(), r.flags.end(), [](auto f) { return f; });
    if (r.flags[0] || r.flags[1]) want_off.insert(r.id);
    if (!any) want_not.insert(r.id);
  }
  std::set<std::string> got_off, got_not;
  for (const auto& x : map_toxic_labels(rows)) {
    EXPECT_EQ(x.source, Source::kToxic);
    EXPECT_FALSE(x.label_b.has_value());
    (x.label_a == LabelA::kOff ? got_off : got_not).insert(x.id);
  }
  EXPECT_EQ(got_off, want_off);
  EXPECT_EQ(got_not, want_not);
  EXPECT_EQ(want_off.size(), 48u);
  EXPECT_EQ(want_not.size(), 1u);
}

TEST(Toxic, FormatRoundTrip) {
  const auto rows = all_flag_combinations();
  EXPECT_EQ(parse_toxic_comments(format_toxic_comments(rows)), rows);
}

std::vector<LabeledExample> make_examples(std::size_t n_off, std::size_t n_not) {
  std::vector<LabeledExample> xs;
  for (std::size_t i = 0; i < n_off + n_not; ++i) {
    LabeledExample x;
    x.id = std::to_string(i);
    x.text = "t" + std::to_string(i);
    x.label_a = i < n_off ? LabelA::kOff : LabelA::kNot;
    xs.push_back(x);
  }
  return xs;
}

std::size_t count(const std::vector<LabeledExample>& xs, LabelA l) {
  return static_cast<std::size_t>(
      std::count_if(xs.begin(), xs.end(), [&](const auto& x) { return x.label_a == l; }));
}

TEST(Balance, AlreadyBalancedUnchanged) {
  const auto xs = make_examples(3, 3);
  EXPECT_EQ(balance(xs, 1), xs);
}

TEST(Balance, DropsOnlyNotDeterministically) {
  const auto xs = make_examples(2, 5);
  const auto a = balance(xs, 7);
  const auto b = balance(xs, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(count(a, LabelA::kOff), 2u);
  EXPECT_EQ(count(a, LabelA::kNot), 2u);
  // survivors keep input order
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(std::stoi(a[i - 1].id), std::stoi(a[i].id));
}

TEST(Balance, FullCorpusScale) {
  const auto xs = make_examples(kToxicPerClassAdded, kToxicMappedSize - kToxicPerClassAdded);
  const auto out = balance(xs, kDefaultDataSeed);
  EXPECT_EQ(count(out, LabelA::kOff), kToxicPerClassAdded);
  EXPECT_EQ(count(out, LabelA::kNot), kToxicPerClassAdded);
  EXPECT_EQ(xs.size() - out.size(), kToxicNotRemoved);
}

TEST(Split, PartitionsById) {
  const auto xs = make_examples(40, 60);
  const auto s = split(xs, 80, 20, 3);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.validation.size(), 20u);
  std::set<std::string> ids;
  for (const auto& x : s.train) ids.insert(x.id);
  for (const auto& x : s.validation) EXPECT_EQ(ids.count(x.id), 0u);
  for (const auto& x : s.validation) ids.insert(x.id);
  EXPECT_EQ(ids.size(), xs.size());
  const auto again = split(xs, 80, 20, 3);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.validation, s.validation);
  EXPECT_NE(split(xs, 80, 20, 4).train, s.train);
}

TEST(Split, EdgeCasesAndErrors) {
  EXPECT_TRUE(split(make_examples(5, 5), 10, 0, 1).validation.empty());
  EXPECT_THROW(split(make_examples(5, 5), 8, 3, 1), DataError);
  const auto full = split(make_examples(4400, kOlidTrainSize - 4400), kOlidTrainSplit,
                           kOlidValidationSplit, kDefaultDataSeed);
  EXPECT_EQ(full.train.size(), 12000u);
  EXPECT_EQ(full.validation.size(), 1240u);
}

TEST(SubtaskB, ViewKeepsLabelledRows) {
  auto xs = make_examples(3, 2);
  xs[0].label_b = LabelB::kTin;
  xs[2].label_b = LabelB::kUnt;
  const auto v = build_subtask_b_view(xs);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(class_index(v[0], Subtask::kB), 0);
  EXPECT_EQ(class_index(v[1], Subtask::kB), 1);
  EXPECT_TRUE(build_subtask_b_view(make_examples(0, 4)).empty());
  EXPECT_THROW(class_index(xs[1], Subtask::kB), DataError);
}

TEST(CountIdentity, ToxicAugmentation) {
  EXPECT_EQ(kToxicMappedSize - kToxicNotRemoved, 2 * kToxicPerClassAdded);
}

TEST(Prepared, RoundTripWithEscapes) {
  auto xs = make_examples(2, 2);
  xs[0].text = "tab\there\nnewline \\ back";
  xs[1].label_b = LabelB::kUnt;
  EXPECT_EQ(parse_prepared(format_prepared(xs)), xs);
  testing::TempDir dir("prepared");
  write_prepared(dir.file("p.tsv"), xs);
  EXPECT_EQ(load_prepared(dir.file("p.tsv")), xs);
}

TEST(TextRecords, ReadsIdAndTweetColumns) {
  testing::TempDir dir("records");
  text::write_file(dir.file("t.tsv"), "id\ttweet\n15923\thello there\n27014\t#tag :)\n");
  const auto rs = load_text_records(dir.file("t.tsv"));
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].id, "27014");
  EXPECT_EQ(rs[1].text, "#tag :)");
  EXPECT_THROW(load_text_records(dir.file("missing.tsv")), DataError);
}

}  // namespace
}  // namespace offnet
