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

#include "core/corpus.hpp"

#include <algorithm>
#include <random>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

std::string_view to_string(LabelA l) { return l == LabelA::kOff ? "OFF" : "NOT"; }
std::string_view to_string(LabelB l) { return l == LabelB::kUnt ? "UNT" : "TIN"; }
std::string_view to_string(Source s) {
  return s == Source::kToxic ? "TOXIC" : "OLID";
}

std::optional<LabelA> parse_label_a(std::string_view s) {
  if (s == "OFF") return LabelA::kOff;
  if (s == "NOT") return LabelA::kNot;
  return std::nullopt;
}

std::optional<LabelB> parse_label_b(std::string_view s) {
  if (s == "TIN") return LabelB::kTin;
  if (s == "UNT") return LabelB::kUnt;
  return std::nullopt;
}

const std::vector<std::string>& class_names(Subtask t) {
  static const std::vector<std::string> a = {"NOT", "OFF"};
  static const std::vector<std::string> b = {"TIN", "UNT"};
  return t == Subtask::kA ? a : b;
}

std::optional<Subtask> parse_subtask(std::string_view s) {
  if (s == "A" || s == "a") return Subtask::kA;
  if (s == "B" || s == "b") return Subtask::kB;
  return std::nullopt;
}

int class_index(const LabeledExample& ex, Subtask t) {
  if (t == Subtask::kA) return ex.label_a == LabelA::kOff ? 1 : 0;
  if (!ex.label_b) {
    throw DataError("example " + ex.id + " has no subtask B label");
  }
  return *ex.label_b == LabelB::kUnt ? 1 : 0;
}

namespace {

std::string line_ref(size_t line_no) {
  return "line " + std::to_string(line_no);
}

std::vector<std::string> split_lines(std::string_view contents) {
  std::vector<std::string> lines = text::split(contents, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string csv_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::vector<LabeledExample> parse_olid(std::string_view contents) {
  const auto lines = split_lines(contents);
  if (lines.empty()) throw DataError("OLID file: missing header");
  const auto header = text::split(lines[0], '\t');
  const std::vector<std::string> expected = {"id", "tweet", "subtask_a",
                                             "subtask_b", "subtask_c"};
  if (header != expected) {
    throw DataError("OLID file: unexpected header '" + lines[0] + "'");
  }
  std::vector<LabeledExample> out;
  out.reserve(lines.size() - 1);
  for (size_t i = 1; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    const auto cols = text::split(lines[i], '\t');
    if (cols.size() != 5) {
      throw DataError("OLID file " + line_ref(line_no) + ": expected 5 columns, got " +
                      std::to_string(cols.size()));
    }
    LabeledExample ex;
    ex.id = cols[0];
    ex.text = cols[1];
    ex.source = Source::kOlid;
    if (ex.text.empty()) throw DataError("OLID file " + line_ref(line_no) + ": empty tweet");
    auto a = parse_label_a(cols[2]);
    if (!a) throw DataError("OLID file " + line_ref(line_no) + ": unknown subtask_a label '" + cols[2] + "'");
    ex.label_a = *a;
    if (cols[3] != "NULL") {
      auto b = parse_label_b(cols[3]);
      if (!b) throw DataError("OLID file " + line_ref(line_no) + ": unknown subtask_b label '" + cols[3] + "'");
      if (ex.label_a != LabelA::kOff) {
        throw DataError("OLID file " + line_ref(line_no) + ": subtask_b label on a NOT row");
      }
      ex.label_b = *b;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledExample> load_olid(const std::string& path) {
  return parse_olid(text::read_file(path));
}

std::string format_olid(const std::vector<LabeledExample>& examples) {
  std::string out = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n";
  for (const auto& ex : examples) {
    out += ex.id + "\t" + ex.text + "\t" + std::string(to_string(ex.label_a)) +
           "\t" + (ex.label_b ? std::string(to_string(*ex.label_b)) : "NULL") +
           "\tNULL\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view contents) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  for (size_t i = 0; i < contents.size(); ++i) {
    const char c = contents[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < contents.size() && contents[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < contents.size() && contents[i + 1] == '\n') ++i;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::vector<ToxicRow> parse_toxic_comments(std::string_view contents) {
  const auto records = parse_csv(contents);
  if (records.empty()) throw DataError("Toxic-Comments file: missing header");
  const std::vector<std::string> expected = {
      "id",     "comment_text", "toxic",  "severe_toxic",
      "obscene", "threat",      "insult", "identity_hate"};
  if (records[0] != expected) {
    throw DataError("Toxic-Comments file: unexpected header");
  }
  std::vector<ToxicRow> rows;
  rows.reserve(records.size() - 1);
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (rec.size() != 8) {
      throw DataError("Toxic-Comments record " + std::to_string(r) +
                      ": expected 8 fields, got " + std::to_string(rec.size()));
    }
    ToxicRow row;
    row.id = rec[0];
    row.comment_text = rec[1];
    for (size_t k = 0; k < 6; ++k) {
      const std::string& v = rec[2 + k];
      if (v != "0" && v != "1") {
        throw DataError("Toxic-Comments record " + std::to_string(r) + " (id " +
                        row.id + "): non-binary " + std::string(kToxicFlagNames[k]) +
                        " value '" + v + "'");
      }
      row.flags[k] = v == "1" ? 1 : 0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ToxicRow> load_toxic_comments(const std::string& path) {
  return parse_toxic_comments(text::read_file(path));
}

std::string format_toxic_comments(const std::vector<ToxicRow>& rows) {
  std::string out =
      "id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate\n";
  for (const auto& row : rows) {
    out += csv_quote(row.id) + "," + csv_quote(row.comment_text);
    for (auto f : row.flags) out += f ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

std::vector<LabeledExample> map_toxic_labels(const std::vector<ToxicRow>& rows) {
  std::vector<LabeledExample> out;
  for (const auto& row : rows) {
    const bool off = row.flags[0] == 1 || row.flags[1] == 1;
    const bool clean = std::all_of(row.flags.begin(), row.flags.end(),
                                   [](std::uint8_t f) { return f == 0; });
    if (!off && !clean) continue;
    LabeledExample ex;
    ex.id = row.id;
    ex.text = row.comment_text;
    ex.label_a = off ? LabelA::kOff : LabelA::kNot;
    ex.source = Source::kToxic;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledExample> balance(const std::vector<LabeledExample>& examples,
                                    std::uint64_t seed) {
  std::vector<size_t> not_idx;
  size_t n_off = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].label_a == LabelA::kOff) {
      ++n_off;
    } else {
      not_idx.push_back(i);
    }
  }
  if (not_idx.size() <= n_off) return examples;

  std::mt19937_64 rng(seed);
  std::shuffle(not_idx.begin(), not_idx.end(), rng);
  std::vector<bool> drop(examples.size(), false);
  for (size_t k = n_off; k < not_idx.size(); ++k) drop[not_idx[k]] = true;

  std::vector<LabeledExample> out;
  out.reserve(2 * n_off);
  for (size_t i = 0; i < examples.size(); ++i) {
    if (!drop[i]) out.push_back(examples[i]);
  }
  return out;
}

DataSplit split(std::vector<LabeledExample> examples, std::size_t n_train,
                std::size_t n_val, std::uint64_t seed) {
  if (n_train + n_val != examples.size()) {
    throw DataError("split: requested " + std::to_string(n_train) + " + " +
                    std::to_string(n_val) + " examples but have " +
                    std::to_string(examples.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(examples.begin(), examples.end(), rng);
  DataSplit out;
  out.seed = seed;
  out.train.assign(std::make_move_iterator(examples.begin()),
                   std::make_move_iterator(examples.begin() + n_train));
  out.validation.assign(std::make_move_iterator(examples.begin() + n_train),
                        std::make_move_iterator(examples.end()));
  return out;
}

std::vector<LabeledExample> build_subtask_b_view(
    const std::vector<LabeledExample>& examples) {
  std::vector<LabeledExample> out;
  for (const auto& ex : examples) {
    if (ex.label_b && ex.source == Source::kOlid) out.push_back(ex);
  }
  return out;
}

std::string format_prepared(const std::vector<LabeledExample>& examples) {
  std::string out = "id\tlabel_a\tlabel_b\ttext\n";
  for (const auto& ex : examples) {
    out += text::escape_field(ex.id) + "\t" + std::string(to_string(ex.label_a)) +
           "\t" + (ex.label_b ? std::string(to_string(*ex.label_b)) : "-") +
           "\t" + text::escape_field(ex.text) + "\n";
  }
  return out;
}

std::vector<LabeledExample> parse_prepared(std::string_view contents) {
  const auto lines = split_lines(contents);
  if (lines.empty() || lines[0] != "id\tlabel_a\tlabel_b\ttext") {
    throw DataError("prepared dataset: missing or unexpected header");
  }
  std::vector<LabeledExample> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto cols = text::split(lines[i], '\t');
    if (cols.size() != 4) {
      throw DataError("prepared dataset " + line_ref(i + 1) +
                      ": expected 4 columns");
    }
    LabeledExample ex;
    ex.id = text::unescape_field(cols[0]);
    auto a = parse_label_a(cols[1]);
    if (!a) throw DataError("prepared dataset " + line_ref(i + 1) + ": unknown label_a '" + cols[1] + "'");
    ex.label_a = *a;
    if (cols[2] != "-") {
      auto b = parse_label_b(cols[2]);
      if (!b) throw DataError("prepared dataset " + line_ref(i + 1) + ": unknown label_b '" + cols[2] + "'");
      ex.label_b = *b;
    }
    ex.text = text::unescape_field(cols[3]);
    out.push_back(std::move(ex));
  }
  return out;
}

void write_prepared(const std::string& path,
                    const std::vector<LabeledExample>& examples) {
  text::write_file(path, format_prepared(examples));
}

std::vector<LabeledExample> load_prepared(const std::string& path) {
  return parse_prepared(text::read_file(path));
}

std::vector<TextRecord> load_text_records(const std::string& path) {
  const auto lines = split_lines(text::read_file(path));
  if (lines.empty()) throw DataError(path + ": missing header");
  const auto header = text::split(lines[0], '\t');
  size_t id_col = header.size();
  size_t text_col = header.size();
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "id") id_col = c;
    if (header[c] == "tweet" || header[c] == "text") text_col = c;
  }
  if (id_col == header.size() || text_col == header.size()) {
    throw DataError(path + ": header needs `id` and `tweet` columns");
  }
  std::vector<TextRecord> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto cols = text::split(lines[i], '\t');
    if (cols.size() != header.size()) {
      throw DataError(path + " " + line_ref(i + 1) + ": expected " +
                      std::to_string(header.size()) + " columns");
    }
    out.push_back({text::unescape_field(cols[id_col]),
                   text::unescape_field(cols[text_col])});
  }
  return out;
}

}  // namespace offnet
