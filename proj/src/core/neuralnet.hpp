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

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "core/encoding.hpp"
#include "core/lexnorm.hpp"

namespace offnet {

enum class Readout { kLast, kMean };
enum class Mode { kTrain, kEval };

std::string_view to_string(Readout r);

struct ModelConfig {
  int char_vocab_size = 258;
  int char_emb_dim = 32;
  int conv1_filters = 64;
  int conv2_filters = 128;
  int kernel_size = 2;
  int pool_size = 2;
  int lstm_units = 256;
  int fc1_units = 128;
  int n_classes = 2;
  double dropout_keep = 0.5;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 20;
  std::uint64_t seed = 5;
  int max_word_len = 32;
  int word_dim = 300;
  Readout readout = Readout::kLast;

  // Throws UsageError on a non-positive size, a keep rate outside (0, 1], or
  // a word length the pooling stack cannot divide.
  void validate() const;

  int pooled_length() const { return max_word_len / (pool_size * pool_size); }
  int char_feature_dim() const { return pooled_length() * conv2_filters; }
  int lstm_input_dim() const { return char_feature_dim() + word_dim; }

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct TensorView {
  std::string_view name;
  T* data;
  std::size_t size;
  std::vector<std::int64_t> shape;
};

// Learned weights. Convolution kernels are stored as [kernel * in_channels,
// filters] with the tap index outermost. LSTM gate blocks are ordered
// input, forget, cell, output.
template <typename T>
struct ModelParams {
  ModelConfig config;
  Matrix<T> char_embedding;  // [char_vocab_size, char_emb_dim]
  Matrix<T> conv1_kernel;
  Vector<T> conv1_bias;
  Matrix<T> conv2_kernel;
  Vector<T> conv2_bias;
  Matrix<T> lstm_input;      // [4H, lstm_input_dim]
  Matrix<T> lstm_recurrent;  // [4H, H]
  Vector<T> lstm_bias;       // [4H]
  Matrix<T> fc1_weight;      // [fc1_units, H]
  Vector<T> fc1_bias;
  Matrix<T> fc2_weight;      // [n_classes, fc1_units]
  Vector<T> fc2_bias;

  // Zero-filled parameters with the shapes implied by `config`.
  static ModelParams zeros(const ModelConfig& config);

  std::vector<TensorView<T>> tensors();
  std::vector<TensorView<const T>> tensors() const;
  std::size_t parameter_count() const;
};

// Seeded uniform init with bound sqrt(3 / fan_in); biases start at zero.
template <typename T>
ModelParams<T> init_model(const ModelConfig& config);

// Per-word character features for a [words, max_word_len] index grid:
// embedding, conv + ReLU, max-pool, conv + ReLU, max-pool, flatten. In train
// mode dropout is applied to the flattened output using `rng`.
template <typename T>
Matrix<T> char_word_features(std::span<const std::int32_t> char_indices,
                             std::size_t words, const ModelParams<T>& params,
                             Mode mode, std::mt19937_64* rng = nullptr);

// Logits [batch, n_classes]. Masked word positions are skipped entirely.
template <typename T>
Matrix<T> forward(const EncodedBatch& batch, const ModelParams<T>& params,
                  Mode mode, std::mt19937_64* rng = nullptr);

// Mean softmax cross-entropy.
template <typename T>
T loss(const Matrix<T>& logits, std::span<const int> labels);

// Row-wise softmax.
template <typename T>
Matrix<T> softmax(const Matrix<T>& logits);

// Mean loss over the batch; `grad` receives d(loss)/d(params).
template <typename T>
T loss_and_gradient(const EncodedBatch& batch, const ModelParams<T>& params,
                    Mode mode, std::mt19937_64* rng, ModelParams<T>& grad);

template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const ModelConfig& config);
  void step(ModelParams<T>& params, const ModelParams<T>& grad);
  std::int64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  ModelParams<T> m_;
  ModelParams<T> v_;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_accuracy = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // epoch number of the retained parameters
  std::vector<std::string> warnings;

  // One JSON object per line.
  std::string to_jsonl() const;
  bool operator==(const TrainHistory&) const = default;
};

template <typename T>
struct TrainResult {
  ModelParams<T> params;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Seeded shuffled mini-batches, Adam updates, validation macro-F1 after each
// epoch. Returns the parameters of the best validation epoch (earliest on
// ties), or of the last epoch when `val` is empty.
template <typename T>
TrainResult<T> train(const std::vector<TokenizedExample>& train_set,
                     const std::vector<TokenizedExample>& val_set,
                     const ModelConfig& config, const CharVocabulary& vocab,
                     const EmbeddingTable& table,
                     const EpochCallback& on_epoch = {});

// Everything needed to turn raw text into an EncodedBatch.
struct PipelineContext {
  const ObfuscationLexicon* lexicon = nullptr;
  NormalizeOptions options;
  const CharVocabulary* vocab = nullptr;
  const EmbeddingTable* table = nullptr;
};

struct Prediction {
  int label = 0;
  double probability = 0.0;
  bool operator==(const Prediction&) const = default;
};

// Argmax of the softmax, ties toward class 0.
Prediction prediction_from_logits(std::span<const double> logits);

template <typename T>
std::vector<Prediction> predict_tokens(const ModelParams<T>& params,
                                       const std::vector<TokenList>& tokens,
                                       const CharVocabulary& vocab,
                                       const EmbeddingTable& table);

template <typename T>
std::vector<Prediction> predict(const ModelParams<T>& params,
                                const std::vector<std::string>& texts,
                                const PipelineContext& context);

}  // namespace offnet
