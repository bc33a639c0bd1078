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

#include "offnet/offnet.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"

struct offnet_config {
  offnet::RunConfig cfg;
};

struct offnet_lexicon {
  offnet::ObfuscationLexicon lexicon;
  offnet::NormalizeOptions options;
};

struct offnet_model {
  offnet::LoadedModel model;
};

namespace {

thread_local std::string g_last_error;

offnet_status fail(offnet_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `fn`, mapping exceptions onto status codes.
template <typename Fn>
offnet_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return OFFNET_OK;
  } catch (const offnet::Error& e) {
    return fail(static_cast<offnet_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(OFFNET_ERR_DATA, "out of memory");
  } catch (const std::exception& e) {
    return fail(OFFNET_ERR_DATA, e.what());
  }
}

offnet::TextSink sink(offnet_text_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::string_view s) { fn(s.data(), s.size(), user); };
}

}  // namespace

extern "C" {

const char* offnet_last_error(void) { return g_last_error.c_str(); }

const char* offnet_version(void) { return "1.0.0"; }

offnet_status offnet_config_create(offnet_config** out) {
  if (!out) return fail(OFFNET_ERR_USAGE, "null output pointer");
  return guarded([&] { *out = new offnet_config(); });
}

void offnet_config_destroy(offnet_config* cfg) { delete cfg; }

offnet_status offnet_config_set(offnet_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

offnet_status offnet_config_load_file(offnet_config* cfg, const char* path) {
  if (!cfg || !path) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] { cfg->cfg.load_file(path); });
}

offnet_status offnet_config_echo(const offnet_config* cfg, offnet_text_fn out, void* user) {
  if (!cfg || !out) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] {
    const std::string s = cfg->cfg.echo();
    out(s.data(), s.size(), user);
  });
}

offnet_status offnet_run_command(const offnet_config* cfg, const char* command,
                                 offnet_text_fn out, offnet_text_fn log, void* user) {
  if (!cfg || !command) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] {
    const offnet::CommandIo io{sink(log, user), sink(out, user)};
    const std::string name = command;
    if (name == "prepare") {
      offnet::cmd_prepare(cfg->cfg, io);
    } else if (name == "train") {
      offnet::cmd_train(cfg->cfg, io);
    } else if (name == "evaluate") {
      offnet::cmd_evaluate(cfg->cfg, io);
    } else if (name == "predict") {
      offnet::cmd_predict(cfg->cfg, io);
    } else if (name == "baseline") {
      offnet::cmd_baseline(cfg->cfg, io);
    } else {
      throw offnet::UsageError("unknown command '" + name + "'");
    }
  });
}

offnet_status offnet_lexicon_create(const offnet_config* cfg, offnet_lexicon** out) {
  if (!out) return fail(OFFNET_ERR_USAGE, "null output pointer");
  return guarded([&] {
    const offnet::RunConfig defaults;
    const offnet::RunConfig& c = cfg ? cfg->cfg : defaults;
    *out = new offnet_lexicon{offnet::lexicon_from_config(c),
                              offnet::normalize_options_from_config(c)};
  });
}

void offnet_lexicon_destroy(offnet_lexicon* lex) { delete lex; }

size_t offnet_lexicon_size(const offnet_lexicon* lex) { return lex ? lex->lexicon.size() : 0; }

offnet_status offnet_lexicon_normalize(const offnet_lexicon* lex, const char* text,
                                       offnet_text_fn out, void* user) {
  if (!lex || !text || !out) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] {
    std::string joined;
    for (const auto& tok : offnet::normalize_text(text, lex->lexicon, lex->options)) {
      if (!joined.empty()) joined.push_back(' ');
      joined += tok;
    }
    out(joined.data(), joined.size(), user);
  });
}

offnet_status offnet_model_load(const char* path, const offnet_config* cfg,
                                offnet_model** out) {
  if (!path || !out) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] {
    const offnet::RunConfig defaults;
    *out = new offnet_model{offnet::LoadedModel::load(path, cfg ? cfg->cfg : defaults)};
  });
}

void offnet_model_destroy(offnet_model* model) { delete model; }

offnet_status offnet_model_predict(const offnet_model* model, const char* const* texts,
                                   size_t n, int* labels, double* probabilities) {
  if (!model || (n > 0 && (!texts || !labels))) return fail(OFFNET_ERR_USAGE, "null argument");
  return guarded([&] {
    std::vector<offnet::TextRecord> records;
    records.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      if (!texts[i]) throw offnet::UsageError("null text at index " + std::to_string(i));
      // embedding-svm models key their inputs by id
      if (model->model.kind() == "embedding-svm") {
        records.push_back({texts[i], ""});
      } else {
        records.push_back({std::to_string(i + 1), texts[i]});
      }
    }
    const auto preds = model->model.predict(records);
    for (size_t i = 0; i < n; ++i) {
      labels[i] = preds[i].label;
      if (probabilities) probabilities[i] = preds[i].probability;
    }
  });
}

const char* offnet_model_class_name(const offnet_model* model, int label) {
  if (!model || label < 0 || label > 1) return nullptr;
  return offnet::class_names(model->model.subtask())[static_cast<size_t>(label)].c_str();
}

offnet_status offnet_metrics_report(const int* gold, const int* pred, size_t n, int n_classes,
                                    offnet_text_fn out, void* user) {
  if ((n > 0 && (!gold || !pred)) || !out || n_classes < 1) {
    return fail(OFFNET_ERR_USAGE, "bad argument");
  }
  return guarded([&] {
    std::vector<std::string> labels;
    for (int c = 0; c < n_classes; ++c) labels.push_back(std::to_string(c));
    const auto rep = offnet::report(offnet::confusion(std::span<const int>(gold, n),
                                                      std::span<const int>(pred, n), labels));
    const std::string j = rep.to_json();
    out(j.data(), j.size(), user);
  });
}

}  // extern "C"
