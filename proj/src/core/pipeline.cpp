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

#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

namespace {

using ojson = nlohmann::ordered_json;

void log_line(const CommandIo& io, const std::string& msg) {
  if (io.log) io.log(msg + "\n");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::string require(const RunConfig& cfg, const std::string& key) {
  if (!cfg.has_value(key)) throw UsageError("missing required setting '" + key + "'");
  return cfg.get(key);
}

Subtask subtask_from_config(const RunConfig& cfg) {
  auto t = parse_subtask(cfg.get("subtask"));
  if (!t) throw UsageError("subtask must be A or B, got '" + cfg.get("subtask") + "'");
  return *t;
}

std::string subtask_name(Subtask t) { return t == Subtask::kA ? "A" : "B"; }

Subtask subtask_from_name(const std::string& s) {
  auto t = parse_subtask(s);
  if (!t) throw DataError("checkpoint: bad subtask '" + s + "'");
  return *t;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

ojson counts_by_class(const std::vector<LabeledExample>& xs) {
  std::map<std::string, std::size_t> by_a, by_b, by_source;
  for (const auto& x : xs) {
    ++by_a[std::string(to_string(x.label_a))];
    if (x.label_b) ++by_b[std::string(to_string(*x.label_b))];
    ++by_source[std::string(to_string(x.source))];
  }
  ojson j;
  j["total"] = xs.size();
  j["label_a"] = by_a;
  j["label_b"] = by_b;
  j["source"] = by_source;
  return j;
}

std::optional<std::size_t> embedding_limit(const RunConfig& cfg) {
  const auto v = cfg.unsigned_integer("embedding_limit");
  if (v == 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

double svm_probability(double decision) {
  return 1.0 / (1.0 + std::exp(-std::abs(decision)));
}

}  // namespace

ObfuscationLexicon lexicon_from_config(const RunConfig& cfg) {
  std::vector<std::string> words = cfg.has_value("word_list")
                                       ? load_word_list(cfg.get("word_list"))
                                       : default_offensive_words();
  SubstitutionMap subs = cfg.has_value("substitutions")
                             ? SubstitutionMap::load(cfg.get("substitutions"))
                             : SubstitutionMap::defaults();
  return ObfuscationLexicon::build(std::move(words), subs,
                                   static_cast<int>(cfg.integer("max_substitutions")));
}

NormalizeOptions normalize_options_from_config(const RunConfig& cfg) {
  NormalizeOptions o;
  o.expand_contractions = cfg.flag("expand_contractions");
  o.expand_abbreviations = cfg.flag("expand_abbreviations");
  return o;
}

ModelConfig model_config_from_config(const RunConfig& cfg) {
  ModelConfig m;
  m.char_emb_dim = static_cast<int>(cfg.integer("char_emb_dim"));
  m.conv1_filters = static_cast<int>(cfg.integer("conv1_filters"));
  m.conv2_filters = static_cast<int>(cfg.integer("conv2_filters"));
  m.kernel_size = static_cast<int>(cfg.integer("kernel_size"));
  m.pool_size = static_cast<int>(cfg.integer("pool_size"));
  m.lstm_units = static_cast<int>(cfg.integer("lstm_units"));
  m.fc1_units = static_cast<int>(cfg.integer("fc1_units"));
  m.dropout_keep = cfg.real("dropout_keep");
  m.learning_rate = cfg.real("learning_rate");
  m.batch_size = static_cast<int>(cfg.integer("batch_size"));
  m.max_epochs = static_cast<int>(cfg.integer("max_epochs"));
  m.seed = cfg.unsigned_integer("seed");
  m.max_word_len = static_cast<int>(cfg.integer("max_word_len"));
  const std::string readout = cfg.get("readout");
  if (readout == "last") {
    m.readout = Readout::kLast;
  } else if (readout == "mean") {
    m.readout = Readout::kMean;
  } else {
    throw UsageError("readout must be last or mean, got '" + readout + "'");
  }
  return m;
}

SgdHyperparams sgd_from_config(const RunConfig& cfg) {
  SgdHyperparams h;
  h.epochs = static_cast<int>(cfg.integer("svm_epochs"));
  h.alpha = cfg.real("svm_alpha");
  h.l1_ratio = cfg.real("svm_l1_ratio");
  h.seed = cfg.unsigned_integer("svm_seed");
  return h;
}

std::vector<std::pair<std::string, std::string>> load_label_csv(const std::string& path) {
  const auto records = parse_csv(text::read_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() < 2) {
      throw DataError(path + " record " + std::to_string(r + 1) + ": expected `id,label`");
    }
    if (r == 0 && rec[0] == "id" && rec[1] == "label") continue;
    out.emplace_back(std::string(text::trim(rec[0])), std::string(text::trim(rec[1])));
  }
  return out;
}

Eigen::MatrixXd gather_sentence_vectors(const EmbeddingTable& table,
                                        const std::vector<std::string>& ids) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), table.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!table.contains(ids[i])) {
      throw DataError("no sentence vector for id '" + ids[i] + "'");
    }
    auto v = table.lookup(ids[i]);
    for (int d = 0; d < table.dim(); ++d) m(static_cast<Eigen::Index>(i), d) = v[d];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Checkpoint packing

namespace {

ojson model_config_json(const ModelConfig& c) {
  ojson j;
  j["char_vocab_size"] = c.char_vocab_size;
  j["char_emb_dim"] = c.char_emb_dim;
  j["conv1_filters"] = c.conv1_filters;
  j["conv2_filters"] = c.conv2_filters;
  j["kernel_size"] = c.kernel_size;
  j["pool_size"] = c.pool_size;
  j["lstm_units"] = c.lstm_units;
  j["fc1_units"] = c.fc1_units;
  j["n_classes"] = c.n_classes;
  j["dropout_keep"] = c.dropout_keep;
  j["learning_rate"] = c.learning_rate;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["max_word_len"] = c.max_word_len;
  j["word_dim"] = c.word_dim;
  j["readout"] = std::string(to_string(c.readout));
  return j;
}

ModelConfig model_config_from_json(const ojson& j) {
  ModelConfig c;
  c.char_vocab_size = j.at("char_vocab_size").get<int>();
  c.char_emb_dim = j.at("char_emb_dim").get<int>();
  c.conv1_filters = j.at("conv1_filters").get<int>();
  c.conv2_filters = j.at("conv2_filters").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.pool_size = j.at("pool_size").get<int>();
  c.lstm_units = j.at("lstm_units").get<int>();
  c.fc1_units = j.at("fc1_units").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  c.dropout_keep = j.at("dropout_keep").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_word_len = j.at("max_word_len").get<int>();
  c.word_dim = j.at("word_dim").get<int>();
  c.readout = j.at("readout").get<std::string>() == "mean" ? Readout::kMean : Readout::kLast;
  return c;
}

ojson hyper_json(const LinearModel& m) {
  ojson j;
  j["epochs"] = m.hyper.epochs;
  j["loss"] = "hinge";
  j["penalty"] = "elasticnet";
  j["alpha"] = m.hyper.alpha;
  j["l1_ratio"] = m.hyper.l1_ratio;
  j["seed"] = m.hyper.seed;
  j["learning_rate_schedule"] = "optimal";
  j["t0"] = m.t0;
  j["epoch_objective"] = m.epoch_objective;
  return j;
}

LinearModel linear_from(const Checkpoint& ckpt) {
  LinearModel m;
  const auto& h = ckpt.meta.at("hyper");
  m.hyper.epochs = h.at("epochs").get<int>();
  m.hyper.alpha = h.at("alpha").get<double>();
  m.hyper.l1_ratio = h.at("l1_ratio").get<double>();
  m.hyper.seed = h.at("seed").get<std::uint64_t>();
  m.t0 = h.at("t0").get<double>();
  m.epoch_objective = h.at("epoch_objective").get<std::vector<double>>();
  m.weights = ckpt.tensor("weights").values;
  m.bias = ckpt.tensor("bias").values.at(0);
  return m;
}

}  // namespace

Checkpoint pack_deep_model(const ModelParams<float>& params, const CharVocabulary& vocab,
                           const ObfuscationLexicon& lexicon, const NormalizeOptions& options,
                           Subtask subtask, const std::string& embeddings_path,
                           const TrainHistory& history) {
  Checkpoint ckpt;
  ckpt.kind = "deep";
  ckpt.meta["subtask"] = subtask_name(subtask);
  ckpt.meta["labels"] = class_names(subtask);
  ckpt.meta["model_config"] = model_config_json(params.config);
  ckpt.meta["embedding_dim"] = params.config.word_dim;
  ckpt.meta["embeddings"] = embeddings_path;
  ckpt.meta["char_vocab"] = vocab.serialize();
  ckpt.meta["lexicon"] = {{"base_words", lexicon.base_words()},
                          {"substitutions", lexicon.substitutions().serialize()},
                          {"max_substitutions", lexicon.max_substitutions()}};
  ckpt.meta["normalize"] = {{"expand_contractions", options.expand_contractions},
                            {"expand_abbreviations", options.expand_abbreviations}};
  ckpt.meta["best_epoch"] = history.best_epoch;
  for (const auto& t : params.tensors()) {
    StoredTensor st;
    st.name = std::string(t.name);
    st.shape = t.shape;
    st.values.assign(t.data, t.data + t.size);
    ckpt.tensors.push_back(std::move(st));
  }
  return ckpt;
}

ModelParams<float> unpack_deep_params(const Checkpoint& ckpt) {
  if (ckpt.kind != "deep") throw DataError("checkpoint is not a deep model");
  ModelConfig cfg;
  try {
    cfg = model_config_from_json(ckpt.meta.at("model_config"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: bad model config: ") + e.what());
  }
  cfg.validate();
  ModelParams<float> p = ModelParams<float>::zeros(cfg);
  for (auto& t : p.tensors()) {
    const StoredTensor& st = ckpt.tensor(t.name);
    if (st.shape != t.shape) {
      throw DataError("checkpoint: tensor '" + st.name + "' has unexpected shape");
    }
    for (std::size_t i = 0; i < t.size; ++i) t.data[i] = static_cast<float>(st.values[i]);
  }
  return p;
}

Checkpoint pack_svm_model(const NgramFeaturizer& featurizer, const LinearModel& model,
                          Subtask subtask) {
  Checkpoint ckpt;
  ckpt.kind = "svm";
  ckpt.meta["subtask"] = subtask_name(subtask);
  ckpt.meta["labels"] = class_names(subtask);
  const auto& r = featurizer.ranges();
  ckpt.meta["ngram_ranges"] = {{"word", {r.word_min, r.word_max}},
                               {"char", {r.char_min, r.char_max}}};
  ckpt.meta["word_vocab"] = featurizer.word_vocab();
  ckpt.meta["char_vocab"] = featurizer.char_vocab();
  ckpt.meta["hyper"] = hyper_json(model);
  ckpt.tensors.push_back({"idf", {static_cast<std::int64_t>(featurizer.idf().size())}, true,
                          featurizer.idf()});
  ckpt.tensors.push_back({"weights", {static_cast<std::int64_t>(model.weights.size())}, true,
                          model.weights});
  ckpt.tensors.push_back({"bias", {1}, true, {model.bias}});
  return ckpt;
}

Checkpoint pack_embedding_svm_model(const LinearModel& model, int dim, Subtask subtask,
                                    const std::string& vectors_path) {
  Checkpoint ckpt;
  ckpt.kind = "embedding-svm";
  ckpt.meta["subtask"] = subtask_name(subtask);
  ckpt.meta["labels"] = class_names(subtask);
  ckpt.meta["vector_dim"] = dim;
  ckpt.meta["sentence_vectors"] = vectors_path;
  ckpt.meta["hyper"] = hyper_json(model);
  ckpt.tensors.push_back({"weights", {static_cast<std::int64_t>(model.weights.size())}, true,
                          model.weights});
  ckpt.tensors.push_back({"bias", {1}, true, {model.bias}});
  return ckpt;
}

// ---------------------------------------------------------------------------
// LoadedModel

LoadedModel LoadedModel::load(const std::string& path, const RunConfig& overrides) {
  return from_checkpoint(load_checkpoint(path), overrides);
}

LoadedModel LoadedModel::from_checkpoint(const Checkpoint& ckpt, const RunConfig& overrides) {
  LoadedModel m;
  m.kind_ = ckpt.kind;
  m.embedding_limit_ = embedding_limit(overrides);
  try {
    m.subtask_ = subtask_from_name(ckpt.meta.at("subtask").get<std::string>());
    if (ckpt.kind == "deep") {
      m.params_ = std::make_shared<const ModelParams<float>>(unpack_deep_params(ckpt));
      m.vocab_ = CharVocabulary::parse(ckpt.meta.at("char_vocab").get<std::string>());
      const auto& lex = ckpt.meta.at("lexicon");
      m.lexicon_ = std::make_shared<const ObfuscationLexicon>(ObfuscationLexicon::build(
          lex.at("base_words").get<std::vector<std::string>>(),
          SubstitutionMap::parse(lex.at("substitutions").get<std::string>()),
          lex.at("max_substitutions").get<int>()));
      m.options_.expand_contractions =
          ckpt.meta.at("normalize").at("expand_contractions").get<bool>();
      m.options_.expand_abbreviations =
          ckpt.meta.at("normalize").at("expand_abbreviations").get<bool>();
      m.vectors_path_ = overrides.has_value("embeddings")
                            ? overrides.get("embeddings")
                            : ckpt.meta.at("embeddings").get<std::string>();
    } else if (ckpt.kind == "svm") {
      const auto& r = ckpt.meta.at("ngram_ranges");
      NgramRanges ranges{r.at("word").at(0).get<int>(), r.at("word").at(1).get<int>(),
                         r.at("char").at(0).get<int>(), r.at("char").at(1).get<int>()};
      m.featurizer_ = std::make_shared<const NgramFeaturizer>(NgramFeaturizer::from_parts(
          ckpt.meta.at("word_vocab").get<std::vector<std::string>>(),
          ckpt.tensor("idf").values,
          ckpt.meta.at("char_vocab").get<std::vector<std::string>>(), ranges));
      m.linear_ = linear_from(ckpt);
      if (m.linear_.weights.size() != m.featurizer_->dim()) {
        throw DataError("checkpoint: SVM weights do not match featurizer");
      }
    } else if (ckpt.kind == "embedding-svm") {
      m.linear_ = linear_from(ckpt);
      m.vector_dim_ = ckpt.meta.at("vector_dim").get<int>();
      m.vectors_path_ = overrides.has_value("sentence_vectors")
                            ? overrides.get("sentence_vectors")
                            : ckpt.meta.at("sentence_vectors").get<std::string>();
    } else {
      throw DataError("checkpoint: unknown model kind '" + ckpt.kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: bad metadata: ") + e.what());
  }
  return m;
}

std::vector<TokenList> LoadedModel::preprocess(const std::vector<TextRecord>& records) const {
  if (kind_ != "deep") throw UsageError("token preprocessing applies to the deep model only");
  std::vector<TokenList> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(normalize_text(r.text, *lexicon_, options_));
  return out;
}

std::vector<Prediction> LoadedModel::predict(const std::vector<TextRecord>& records) const {
  if (records.empty()) return {};
  if (kind_ == "deep") {
    if (vectors_path_.empty()) throw UsageError("deep model needs an embeddings file");
    const auto tokens = preprocess(records);
    const auto keys = embedding_keys(tokens);
    const EmbeddingTable table = EmbeddingTable::load(vectors_path_, embedding_limit_, &keys);
    if (table.dim() != params_->config.word_dim) {
      throw DataError("embedding dimension " + std::to_string(table.dim()) +
                      " does not match the model's " + std::to_string(params_->config.word_dim));
    }
    return predict_tokens(*params_, tokens, vocab_, table);
  }
  std::vector<Prediction> out;
  out.reserve(records.size());
  auto push = [&](double d) {
    out.push_back({d > 0.0 ? 1 : 0, svm_probability(d)});
  };
  if (kind_ == "svm") {
    std::vector<std::string> texts;
    for (const auto& r : records) texts.push_back(r.text);
    const SparseMatrix x = featurizer_->transform(texts);
    for (std::size_t r = 0; r < x.rows(); ++r) push(linear_.decision(x, r));
    return out;
  }
  if (vectors_path_.empty()) throw UsageError("embedding-svm model needs a sentence_vectors file");
  std::unordered_set<std::string> keys;
  std::vector<std::string> ids;
  for (const auto& r : records) {
    keys.insert(r.id);
    ids.push_back(r.id);
  }
  const EmbeddingTable table = EmbeddingTable::load(vectors_path_, std::nullopt, &keys);
  if (table.dim() != vector_dim_) throw DataError("sentence vector dimension mismatch");
  const SparseMatrix x = SparseMatrix::from_dense(gather_sentence_vectors(table, ids));
  for (std::size_t r = 0; r < x.rows(); ++r) push(linear_.decision(x, r));
  return out;
}

// ---------------------------------------------------------------------------
// Commands

nlohmann::ordered_json cmd_prepare(const RunConfig& cfg, const CommandIo& io) {
  const Subtask subtask = subtask_from_config(cfg);
  const bool augment = cfg.flag("augment");
  if (augment && subtask == Subtask::kB) {
    throw UsageError("subtask B cannot use toxic-comment augmentation (no TIN/UNT labels)");
  }
  if (augment && !cfg.has_value("toxic")) {
    throw UsageError("augmentation requested but no toxic-comments path given");
  }
  const auto olid = load_olid(require(cfg, "olid_train"));
  const std::size_t n_val = static_cast<std::size_t>(cfg.unsigned_integer("n_val"));
  if (n_val > olid.size()) {
    throw DataError("n_val " + std::to_string(n_val) + " exceeds the " +
                    std::to_string(olid.size()) + " OLID rows");
  }
  const std::uint64_t split_seed = cfg.unsigned_integer("split_seed");
  const std::uint64_t balance_seed = cfg.unsigned_integer("balance_seed");
  log_line(io, "loaded " + std::to_string(olid.size()) + " OLID rows");
  DataSplit parts = split(olid, olid.size() - n_val, n_val, split_seed);

  ojson manifest;
  manifest["subtask"] = subtask_name(subtask);
  manifest["olid_rows"] = olid.size();
  manifest["split_seed"] = split_seed;
  manifest["balance_seed"] = balance_seed;
  manifest["n_train_olid"] = parts.train.size();
  manifest["n_validation"] = parts.validation.size();

  if (augment) {
    const auto rows = load_toxic_comments(cfg.get("toxic"));
    const auto mapped = map_toxic_labels(rows);
    const auto balanced = balance(mapped, balance_seed);
    std::size_t mapped_off = 0, added_off = 0;
    for (const auto& x : mapped) mapped_off += x.label_a == LabelA::kOff;
    for (const auto& x : balanced) added_off += x.label_a == LabelA::kOff;
    ojson t;
    t["rows"] = rows.size();
    t["mapped"] = mapped.size();
    t["mapped_off"] = mapped_off;
    t["mapped_not"] = mapped.size() - mapped_off;
    t["excluded"] = rows.size() - mapped.size();
    t["not_removed"] = mapped.size() - balanced.size();
    t["added_off"] = added_off;
    t["added_not"] = balanced.size() - added_off;
    manifest["toxic"] = t;
    log_line(io, "toxic comments: " + std::to_string(rows.size()) + " rows, " +
                     std::to_string(balanced.size()) + " added after balancing");
    parts.train.insert(parts.train.end(), balanced.begin(), balanced.end());
  } else {
    manifest["toxic"] = nullptr;
  }

  if (subtask == Subtask::kB) {
    parts.train = build_subtask_b_view(parts.train);
    parts.validation = build_subtask_b_view(parts.validation);
  }
  manifest["train"] = counts_by_class(parts.train);
  manifest["validation"] = counts_by_class(parts.validation);

  const std::string dir = cfg.prepared_dir();
  ensure_dir(dir);
  write_prepared((std::filesystem::path(dir) / "train.tsv").string(), parts.train);
  write_prepared((std::filesystem::path(dir) / "validation.tsv").string(), parts.validation);
  text::write_file((std::filesystem::path(dir) / "manifest.json").string(),
                   manifest.dump(2) + "\n");
  log_line(io, "wrote " + std::to_string(parts.train.size()) + " training and " +
                   std::to_string(parts.validation.size()) + " validation examples to " + dir);
  return manifest;
}

void cmd_train(const RunConfig& cfg, const CommandIo& io) {
  const Subtask subtask = subtask_from_config(cfg);
  const std::string model_kind = cfg.get("model");
  const std::filesystem::path dir = cfg.prepared_dir();
  auto train_ex = load_prepared((dir / "train.tsv").string());
  auto val_ex = load_prepared((dir / "validation.tsv").string());
  if (cfg.flag("include_validation_in_training")) {
    train_ex.insert(train_ex.end(), val_ex.begin(), val_ex.end());
    val_ex.clear();
  }
  if (subtask == Subtask::kB) {
    auto has_b = [](const LabeledExample& x) { return x.label_b.has_value(); };
    if (!std::all_of(train_ex.begin(), train_ex.end(), has_b) ||
        !std::all_of(val_ex.begin(), val_ex.end(), has_b)) {
      throw DataError("prepared data contains rows without subtask B labels; "
                      "re-run prepare with subtask = B");
    }
  }
  if (train_ex.empty()) throw DataError("prepared training set is empty");

  std::vector<int> y_train, y_val;
  for (const auto& x : train_ex) y_train.push_back(class_index(x, subtask));
  for (const auto& x : val_ex) y_val.push_back(class_index(x, subtask));

  ensure_dir(cfg.get("out_dir"));
  const std::string ckpt_path =
      cfg.has_value("checkpoint") ? cfg.get("checkpoint") : cfg.output_path("model.offmdl");
  text::write_file(cfg.output_path("config_echo.conf"), cfg.echo());

  if (model_kind == "deep") {
    const ObfuscationLexicon lexicon = lexicon_from_config(cfg);
    const NormalizeOptions options = normalize_options_from_config(cfg);
    std::vector<TokenizedExample> tr, va;
    std::vector<TokenList> corpus;
    for (std::size_t i = 0; i < train_ex.size(); ++i) {
      tr.push_back({normalize_text(train_ex[i].text, lexicon, options), y_train[i]});
      corpus.push_back(tr.back().tokens);
    }
    for (std::size_t i = 0; i < val_ex.size(); ++i) {
      va.push_back({normalize_text(val_ex[i].text, lexicon, options), y_val[i]});
    }
    const CharVocabulary vocab = CharVocabulary::build(corpus);
    ModelConfig mc = model_config_from_config(cfg);
    if (mc.max_word_len == 0) {
      mc.max_word_len = static_cast<int>(default_max_word_len(
          corpus, kMaxWordLenCap, static_cast<std::size_t>(mc.pool_size * mc.pool_size)));
    }
    std::vector<TokenList> all_tokens = corpus;
    for (const auto& x : va) all_tokens.push_back(x.tokens);
    const auto keys = embedding_keys(all_tokens);
    const std::string emb_path = require(cfg, "embeddings");
    const EmbeddingTable table = EmbeddingTable::load(emb_path, embedding_limit(cfg), &keys);
    mc.word_dim = table.dim();
    log_line(io, "training deep model on " + std::to_string(tr.size()) + " examples (" +
                     std::to_string(table.size()) + " embedding rows, max_word_len " +
                     std::to_string(mc.max_word_len) + ")");
    auto result = train<float>(tr, va, mc, vocab, table, [&](const EpochRecord& e) {
      log_line(io, "epoch " + std::to_string(e.epoch) + " loss " + std::to_string(e.train_loss) +
                       " val_macro_f1 " + std::to_string(e.val_macro_f1));
    });
    for (const auto& w : result.history.warnings) log_line(io, "warning: " + w);
    text::write_file(cfg.output_path("history.jsonl"), result.history.to_jsonl());
    save_checkpoint(ckpt_path, pack_deep_model(result.params, vocab, lexicon, options, subtask,
                                               emb_path, result.history));
  } else if (model_kind == "svm") {
    std::vector<std::string> texts;
    for (const auto& x : train_ex) texts.push_back(x.text);
    const NgramFeaturizer f = NgramFeaturizer::fit(texts);
    const SparseMatrix xm = f.transform(texts);
    log_line(io, "training n-gram SVM on " + std::to_string(xm.rows()) + " examples, " +
                     std::to_string(f.dim()) + " features");
    const LinearModel model = train_linear_svm(xm, y_train, sgd_from_config(cfg));
    std::string hist;
    for (std::size_t e = 0; e < model.epoch_objective.size(); ++e) {
      ojson j;
      j["epoch"] = e + 1;
      j["objective"] = model.epoch_objective[e];
      hist += j.dump() + "\n";
    }
    text::write_file(cfg.output_path("history.jsonl"), hist);
    save_checkpoint(ckpt_path, pack_svm_model(f, model, subtask));
  } else if (model_kind == "embedding-svm") {
    const std::string path = require(cfg, "sentence_vectors");
    std::unordered_set<std::string> keys;
    std::vector<std::string> ids;
    for (const auto& x : train_ex) {
      keys.insert(x.id);
      ids.push_back(x.id);
    }
    const EmbeddingTable table = EmbeddingTable::load(path, std::nullopt, &keys);
    const LinearModel model =
        train_embedding_svm(gather_sentence_vectors(table, ids), y_train, sgd_from_config(cfg));
    std::string hist;
    for (std::size_t e = 0; e < model.epoch_objective.size(); ++e) {
      ojson j;
      j["epoch"] = e + 1;
      j["objective"] = model.epoch_objective[e];
      hist += j.dump() + "\n";
    }
    text::write_file(cfg.output_path("history.jsonl"), hist);
    save_checkpoint(ckpt_path, pack_embedding_svm_model(model, table.dim(), subtask, path));
  } else {
    throw UsageError("model must be deep, svm or embedding-svm, got '" + model_kind + "'");
  }
  log_line(io, "wrote " + ckpt_path);
}

namespace {

ojson baselines_json(std::span<const int> gold, const std::vector<std::string>& labels,
                     std::vector<MetricsReport>* reports) {
  ojson j;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    MetricsReport r = trivial_baseline(gold, static_cast<int>(c), labels);
    j["All " + labels[c]] = ojson::parse(r.to_json());
    if (reports) reports->push_back(std::move(r));
  }
  return j;
}

std::vector<int> gold_indices(const std::vector<std::pair<std::string, std::string>>& gold,
                              const std::vector<std::string>& labels) {
  std::vector<int> out;
  for (const auto& [id, label] : gold) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw DataError("gold label '" + label + "' (id " + id +
                      ") is not in the class set " + text::join(labels, "/"));
    }
    out.push_back(static_cast<int>(it - labels.begin()));
  }
  return out;
}

}  // namespace

MetricsReport cmd_evaluate(const RunConfig& cfg, const CommandIo& io) {
  Subtask subtask = subtask_from_config(cfg);
  const auto gold = load_label_csv(require(cfg, "gold"));
  if (gold.empty()) throw DataError("gold file has no rows");
  ensure_dir(cfg.get("out_dir"));

  std::unordered_map<std::string, std::string> predicted;
  if (cfg.has_value("predictions")) {
    for (auto& [id, label] : load_label_csv(cfg.get("predictions"))) predicted[id] = label;
  } else {
    const LoadedModel model = LoadedModel::load(require(cfg, "checkpoint"), cfg);
    subtask = model.subtask();
    const auto records = load_text_records(require(cfg, "texts"));
    const auto preds = model.predict(records);
    const auto& names = class_names(subtask);
    std::string csv = "id,label\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const std::string& label = names.at(static_cast<std::size_t>(preds[i].label));
      predicted[records[i].id] = label;
      csv += csv_field(records[i].id) + "," + label + "\n";
    }
    text::write_file(cfg.output_path("predictions.csv"), csv);
  }

  const auto& labels = class_names(subtask);
  const std::vector<int> g = gold_indices(gold, labels);
  std::vector<std::string> gold_labels, pred_labels;
  for (const auto& [id, label] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw DataError("no prediction for id '" + id + "'");
    gold_labels.push_back(label);
    pred_labels.push_back(it->second);
  }
  const MetricsReport rep = report(confusion(gold_labels, pred_labels, labels));
  text::write_file(cfg.output_path("metrics.json"), rep.to_json() + "\n");
  text::write_file(cfg.output_path("confusion.txt"), render_confusion(rep.confusion));
  text::write_file(cfg.output_path("baselines.json"),
                   baselines_json(g, labels, nullptr).dump(2) + "\n");
  if (io.out) {
    io.out(rep.to_json() + "\n");
    io.out(render_confusion(rep.confusion));
  }
  return rep;
}

void cmd_predict(const RunConfig& cfg, const CommandIo& io) {
  const LoadedModel model = LoadedModel::load(require(cfg, "checkpoint"), cfg);
  const bool debug = cfg.flag("debug_tokens");
  if (debug && model.kind() != "deep") {
    throw UsageError("debug_tokens applies to the deep model only");
  }
  std::vector<TextRecord> records;
  std::size_t line_no = 0;
  for (auto& line : text::read_lines(require(cfg, "input"))) {
    ++line_no;
    // embedding-svm input lines are example ids; otherwise raw text
    if (model.kind() == "embedding-svm") {
      records.push_back({std::string(text::trim(line)), ""});
    } else {
      records.push_back({std::to_string(line_no), std::move(line)});
    }
  }
  const auto preds = model.predict(records);
  std::vector<TokenList> tokens;
  if (debug) tokens = model.preprocess(records);
  const auto& names = class_names(model.subtask());
  std::string csv = debug ? "id,label,probability,tokens\n" : "id,label,probability\n";
  char prob[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::snprintf(prob, sizeof(prob), "%.6f", preds[i].probability);
    csv += csv_field(records[i].id) + "," + names.at(static_cast<std::size_t>(preds[i].label)) +
           "," + prob;
    if (debug) csv += "," + csv_field(text::join(tokens[i], " "));
    csv += "\n";
  }
  if (cfg.has_value("output")) {
    text::write_file(cfg.get("output"), csv);
  } else if (io.out) {
    io.out(csv);
  }
}

std::vector<MetricsReport> cmd_baseline(const RunConfig& cfg, const CommandIo& io) {
  const Subtask subtask = subtask_from_config(cfg);
  const auto gold = load_label_csv(require(cfg, "gold"));
  if (gold.empty()) throw DataError("gold file has no rows");
  const auto& labels = class_names(subtask);
  const std::vector<int> g = gold_indices(gold, labels);
  std::vector<MetricsReport> reports;
  const ojson j = baselines_json(g, labels, &reports);
  ensure_dir(cfg.get("out_dir"));
  text::write_file(cfg.output_path("baselines.json"), j.dump(2) + "\n");
  if (io.out) io.out(j.dump(2) + "\n");
  return reports;
}

}  // namespace offnet
