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

#include "core/run_config.hpp"

#include <charconv>
#include <filesystem>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      // inputs and outputs
      {"olid_train", ""},
      {"toxic", ""},
      {"embeddings", ""},
      {"embedding_limit", "0"},
      {"word_list", ""},
      {"substitutions", ""},
      {"out_dir", "."},
      {"prepared_dir", ""},
      {"checkpoint", ""},
      {"texts", ""},
      {"gold", ""},
      {"predictions", ""},
      {"input", ""},
      {"output", ""},
      {"sentence_vectors", ""},
      // task and data recipe
      {"subtask", "A"},
      {"model", "deep"},
      {"augment", "false"},
      {"include_validation_in_training", "false"},
      {"n_val", "1240"},
      {"split_seed", "5"},
      {"balance_seed", "5"},
      // preprocessing
      {"max_substitutions", "3"},
      {"expand_contractions", "false"},
      {"expand_abbreviations", "false"},
      {"debug_tokens", "false"},
      // deep model
      {"char_emb_dim", "32"},
      {"conv1_filters", "64"},
      {"conv2_filters", "128"},
      {"kernel_size", "2"},
      {"pool_size", "2"},
      {"lstm_units", "256"},
      {"fc1_units", "128"},
      {"dropout_keep", "0.5"},
      {"learning_rate", "0.001"},
      {"batch_size", "32"},
      {"max_epochs", "20"},
      {"seed", "5"},
      {"max_word_len", "0"},
      {"readout", "last"},
      // SVM baselines
      {"svm_epochs", "15"},
      {"svm_alpha", "1e-6"},
      {"svm_l1_ratio", "0.15"},
      {"svm_seed", "5"},
      {"deterministic", "true"},
  };
  return d;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = std::string(text::trim(value));
}

void RunConfig::parse(std::string_view contents) {
  size_t line_no = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected `key = value`");
    }
    set(std::string(text::trim(line.substr(0, eq))), std::string(line.substr(eq + 1)));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::string contents;
  try {
    contents = text::read_file(path);
  } catch (const DataError&) {
    throw UsageError("cannot read config file: " + path);
  }
  parse(contents);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

long long RunConfig::integer(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const long long v = integer(key);
  if (v < 0) throw UsageError("config key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

double RunConfig::real(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string v = text::ascii_lower(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string RunConfig::output_path(const std::string& name) const {
  return (std::filesystem::path(get("out_dir")) / name).string();
}

std::string RunConfig::prepared_dir() const {
  return has_value("prepared_dir") ? get("prepared_dir") : get("out_dir");
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace offnet
