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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/baselines.hpp"
#include "core/checkpoint.hpp"
#include "core/corpus.hpp"
#include "core/encoding.hpp"
#include "core/lexnorm.hpp"
#include "core/metrics.hpp"
#include "core/neuralnet.hpp"
#include "core/run_config.hpp"

namespace offnet {

using TextSink = std::function<void(std::string_view)>;

// Progress and warnings go to `log`; command results meant for the terminal
// (reports, predictions without an output path) go to `out`.
struct CommandIo {
  TextSink log;
  TextSink out;
};

// Preprocessing settings from the config: word list and substitution files
// when given, the built-in tables otherwise.
ObfuscationLexicon lexicon_from_config(const RunConfig& cfg);
NormalizeOptions normalize_options_from_config(const RunConfig& cfg);
ModelConfig model_config_from_config(const RunConfig& cfg);
SgdHyperparams sgd_from_config(const RunConfig& cfg);

// Gold or prediction CSV `id,label[,...]`; a leading `id,label` header is
// optional.
std::vector<std::pair<std::string, std::string>> load_label_csv(const std::string& path);

// A trained model of any kind, restored from a checkpoint.
class LoadedModel {
 public:
  // `overrides` may redirect the embeddings or sentence-vector files.
  static LoadedModel load(const std::string& path, const RunConfig& overrides);
  static LoadedModel from_checkpoint(const Checkpoint& ckpt, const RunConfig& overrides);

  const std::string& kind() const { return kind_; }
  Subtask subtask() const { return subtask_; }

  std::vector<Prediction> predict(const std::vector<TextRecord>& records) const;

  // Deep model only: the preprocessed tokens the model sees.
  std::vector<TokenList> preprocess(const std::vector<TextRecord>& records) const;

 private:
  std::string kind_;
  Subtask subtask_ = Subtask::kA;
  std::string vectors_path_;  // embeddings (deep) or sentence vectors
  std::optional<std::size_t> embedding_limit_;
  // deep
  std::shared_ptr<const ObfuscationLexicon> lexicon_;
  NormalizeOptions options_;
  CharVocabulary vocab_;
  std::shared_ptr<const ModelParams<float>> params_;
  // svm / embedding-svm
  std::shared_ptr<const NgramFeaturizer> featurizer_;
  LinearModel linear_;
  int vector_dim_ = 0;
};

Checkpoint pack_deep_model(const ModelParams<float>& params, const CharVocabulary& vocab,
                           const ObfuscationLexicon& lexicon, const NormalizeOptions& options,
                           Subtask subtask, const std::string& embeddings_path,
                           const TrainHistory& history);
ModelParams<float> unpack_deep_params(const Checkpoint& ckpt);

Checkpoint pack_svm_model(const NgramFeaturizer& featurizer, const LinearModel& model,
                          Subtask subtask);
Checkpoint pack_embedding_svm_model(const LinearModel& model, int dim, Subtask subtask,
                                    const std::string& vectors_path);

// Sentence vectors keyed by example id, in the embedding text format.
Eigen::MatrixXd gather_sentence_vectors(const EmbeddingTable& table,
                                        const std::vector<std::string>& ids);

nlohmann::ordered_json cmd_prepare(const RunConfig& cfg, const CommandIo& io);
void cmd_train(const RunConfig& cfg, const CommandIo& io);
MetricsReport cmd_evaluate(const RunConfig& cfg, const CommandIo& io);
void cmd_predict(const RunConfig& cfg, const CommandIo& io);
std::vector<MetricsReport> cmd_baseline(const RunConfig& cfg, const CommandIo& io);

}  // namespace offnet
