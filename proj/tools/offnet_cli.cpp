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

// offnet command-line driver: prepare, train, evaluate, predict, baseline.
//
// Settings resolve as defaults < --config file < flags and --set overrides.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "offnet/offnet.h"

namespace {

void to_stdout(const char* text, size_t len, void*) { std::fwrite(text, 1, len, stdout); }
void to_stderr(const char* text, size_t len, void*) { std::fwrite(text, 1, len, stderr); }

struct Shortcut {
  const char* flag;
  const char* key;
  const char* help;
};

// Convenience flags; anything else goes through --set key=value.
constexpr Shortcut kShortcuts[] = {
    {"--subtask", "subtask", "A or B"},
    {"--model", "model", "deep, svm or embedding-svm"},
    {"--olid-train", "olid_train", "OLID training TSV"},
    {"--toxic", "toxic", "toxic-comments CSV"},
    {"--embeddings", "embeddings", "word embeddings in text format"},
    {"--sentence-vectors", "sentence_vectors", "sentence vectors keyed by id"},
    {"--word-list", "word_list", "offensive base-word list"},
    {"--substitutions", "substitutions", "obfuscation substitution map"},
    {"--out-dir", "out_dir", "output directory"},
    {"--prepared-dir", "prepared_dir", "prepared data directory (default: out_dir)"},
    {"--checkpoint", "checkpoint", "model checkpoint"},
    {"--texts", "texts", "TSV with id and tweet columns to evaluate on"},
    {"--gold", "gold", "gold labels CSV (id,label)"},
    {"--predictions", "predictions", "predictions CSV to score instead of a checkpoint"},
    {"--input", "input", "one text per line"},
    {"--output", "output", "output file (default: stdout)"},
    {"--seed", "seed", "model seed"},
    {"--max-epochs", "max_epochs", "training epochs"},
};

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> shortcut_values;
  bool augment = false;
  bool with_val = false;
  bool debug_tokens = false;
  bool deterministic = true;
};

void add_common(CLI::App* sub, Options& opt, std::vector<std::string>& storage) {
  sub->add_option("-c,--config", opt.config_path, "key = value configuration file");
  sub->add_option("--set", opt.sets, "override a setting, key=value (repeatable)");
  for (std::size_t i = 0; i < std::size(kShortcuts); ++i) {
    sub->add_option(kShortcuts[i].flag, storage[i], kShortcuts[i].help);
  }
  sub->add_flag("--augment", opt.augment, "add balanced toxic-comment data (subtask A)");
  sub->add_flag("--include-validation", opt.with_val,
                "train on train + validation (no model selection)");
  sub->add_flag("--debug-tokens", opt.debug_tokens, "emit normalized tokens with predictions");
  sub->add_flag("--deterministic,!--no-deterministic", opt.deterministic,
                "sequential execution (always on)");
}

int apply(offnet_status s) {
  if (s != OFFNET_OK) std::fprintf(stderr, "offnet: error: %s\n", offnet_last_error());
  return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offnet: offensive-language detection toolkit"};
  app.require_subcommand(1);
  Options opt;
  std::vector<std::string> storage(std::size(kShortcuts));
  for (const char* name : {"prepare", "train", "evaluate", "predict", "baseline"}) {
    const char* help = "";
    std::string n = name;
    if (n == "prepare") help = "load, map, balance and split the training data";
    if (n == "train") help = "train a deep or SVM model and write a checkpoint";
    if (n == "evaluate") help = "score a checkpoint or predictions against gold labels";
    if (n == "predict") help = "label each line of an input file";
    if (n == "baseline") help = "trivial all-one-class baselines for a gold file";
    add_common(app.add_subcommand(name, help), opt, storage);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  offnet_config* cfg = nullptr;
  if (offnet_config_create(&cfg) != OFFNET_OK) return apply(OFFNET_ERR_DATA);
  auto set = [&](const std::string& key, const std::string& value) {
    return offnet_config_set(cfg, key.c_str(), value.c_str());
  };
  offnet_status s = OFFNET_OK;
  if (!opt.config_path.empty()) s = offnet_config_load_file(cfg, opt.config_path.c_str());
  for (std::size_t i = 0; s == OFFNET_OK && i < std::size(kShortcuts); ++i) {
    if (!storage[i].empty()) s = set(kShortcuts[i].key, storage[i]);
  }
  if (s == OFFNET_OK && opt.augment) s = set("augment", "true");
  if (s == OFFNET_OK && opt.with_val) s = set("include_validation_in_training", "true");
  if (s == OFFNET_OK && opt.debug_tokens) s = set("debug_tokens", "true");
  if (s == OFFNET_OK && !opt.deterministic) s = set("deterministic", "false");
  for (const auto& kv : opt.sets) {
    if (s != OFFNET_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "offnet: error: --set expects key=value, got '%s'\n", kv.c_str());
      offnet_config_destroy(cfg);
      return 1;
    }
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t");
      const auto e = x.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    s = set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (s == OFFNET_OK) s = offnet_run_command(cfg, command.c_str(), to_stdout, to_stderr, nullptr);
  offnet_config_destroy(cfg);
  return apply(s);
}
