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

#include <chrono>
#include <cstring>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "core/encoding.hpp"
#include "core/error.hpp"
#include "core/neuralnet.hpp"
#include "test_support.hpp"

namespace offnet {
namespace {

using testing::separable_token_examples;
using testing::toy_embeddings;
using testing::toy_model_config;

// ---------------------------------------------------------------------------
// Naive reference implementation: plain loops, no shared code with the model.

using Grid = std::vector<std::vector<double>>;  // [position][channel]

Grid ref_conv_relu(const Grid& x, const Matrix<double>& kernel, const Vector<double>& bias,
                   int k) {
  const int len = static_cast<int>(x.size());
  const int in = static_cast<int>(x[0].size());
  const int before = (k - 1) / 2;
  Grid y(static_cast<std::size_t>(len), std::vector<double>(static_cast<std::size_t>(bias.size())));
  for (int t = 0; t < len; ++t) {
    for (int f = 0; f < bias.size(); ++f) {
      double s = bias(f);
      for (int j = 0; j < k; ++j) {
        const int src = t + j - before;
        if (src < 0 || src >= len) continue;
        for (int c = 0; c < in; ++c) s += x[src][c] * kernel(j * in + c, f);
      }
      y[t][f] = std::max(0.0, s);
    }
  }
  return y;
}

Grid ref_pool(const Grid& x, int p) {
  Grid y;
  for (std::size_t t = 0; t + p <= x.size(); t += p) {
    std::vector<double> row = x[t];
    for (int j = 1; j < p; ++j)
      for (std::size_t f = 0; f < row.size(); ++f) row[f] = std::max(row[f], x[t + j][f]);
    y.push_back(row);
  }
  return y;
}

std::vector<double> ref_char_features(std::span<const std::int32_t> chars,
                                      const ModelParams<double>& m) {
  const auto& c = m.config;
  Grid x;
  for (auto idx : chars) {
    std::vector<double> row;
    for (int e = 0; e < c.char_emb_dim; ++e) row.push_back(m.char_embedding(idx, e));
    x.push_back(row);
  }
  Grid h = ref_pool(ref_conv_relu(x, m.conv1_kernel, m.conv1_bias, c.kernel_size), c.pool_size);
  h = ref_pool(ref_conv_relu(h, m.conv2_kernel, m.conv2_bias, c.kernel_size), c.pool_size);
  std::vector<double> flat;
  for (const auto& row : h) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<double> ref_logits(const EncodedBatch& batch, std::size_t b,
                               const ModelParams<double>& m) {
  const auto& c = m.config;
  const int H = c.lstm_units;
  std::vector<double> h(H, 0.0), cell(H, 0.0), sum(H, 0.0);
  int steps = 0;
  for (std::size_t w = 0; w < batch.max_words; ++w) {
    if (!batch.has_word(b, w)) continue;
    std::vector<double> z = ref_char_features(batch.chars_of(b, w), m);
    for (float v : batch.vector_of(b, w)) z.push_back(v);
    std::vector<double> g(4 * H);
    for (int r = 0; r < 4 * H; ++r) {
      double s = m.lstm_bias(r);
      for (std::size_t i = 0; i < z.size(); ++i) s += m.lstm_input(r, static_cast<int>(i)) * z[i];
      for (int j = 0; j < H; ++j) s += m.lstm_recurrent(r, j) * h[j];
      g[r] = s;
    }
    for (int j = 0; j < H; ++j) {
      const double in = sig(g[j]), fo = sig(g[H + j]), cc = std::tanh(g[2 * H + j]),
                   out = sig(g[3 * H + j]);
      cell[j] = fo * cell[j] + in * cc;
      h[j] = out * std::tanh(cell[j]);
      sum[j] += h[j];
    }
    ++steps;
  }
  std::vector<double> r = h;
  if (c.readout == Readout::kMean)
    for (int j = 0; j < H; ++j) r[j] = sum[j] / steps;
  std::vector<double> a(c.fc1_units);
  for (int u = 0; u < c.fc1_units; ++u) {
    double s = m.fc1_bias(u);
    for (int j = 0; j < H; ++j) s += m.fc1_weight(u, j) * r[j];
    a[u] = std::max(0.0, s);
  }
  std::vector<double> out(c.n_classes);
  for (int k = 0; k < c.n_classes; ++k) {
    double s = m.fc2_bias(k);
    for (int u = 0; u < c.fc1_units; ++u) s += m.fc2_weight(k, u) * a[u];
    out[k] = s;
  }
  return out;
}

// Biases start at zero; give them values so the checks exercise them.
template <typename T>
void jitter_biases(ModelParams<T>& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto* v : {&p.conv1_bias, &p.conv2_bias, &p.lstm_bias, &p.fc1_bias, &p.fc2_bias})
    for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = static_cast<T>(u(rng));
}

struct ToyData {
  std::vector<TokenizedExample> examples;
  CharVocabulary vocab;
  EmbeddingTable table;
};

ToyData toy_data(std::size_t n, int dim = 5) {
  ToyData d{separable_token_examples(n, 9), {}, toy_embeddings(dim, 4)};
  std::vector<TokenList> corpus;
  for (const auto& e : d.examples) corpus.push_back(e.tokens);
  d.vocab = CharVocabulary::build(corpus);
  // one out-of-vocabulary word so zero word vectors are covered
  d.examples[0].tokens.push_back("zzqx");
  return d;
}

// ---------------------------------------------------------------------------

TEST(Init, ShapesFollowConfig) {
  ModelConfig c;
  const auto p = init_model<float>(c);
  EXPECT_EQ(p.char_embedding.rows(), 258);
  EXPECT_EQ(p.char_embedding.cols(), 32);
  c.lstm_units = 8;
  const auto q = init_model<float>(c);
  EXPECT_EQ(q.lstm_input.rows(), 32);
  EXPECT_EQ(q.lstm_input.cols(), c.char_feature_dim() + c.word_dim);
  EXPECT_EQ(q.lstm_recurrent.rows(), 32);
  EXPECT_EQ(q.lstm_recurrent.cols(), 8);
  EXPECT_EQ(q.fc2_weight.rows(), 2);
}

TEST(Init, SeededAndBounded) {
  const ModelConfig c = toy_model_config();
  const auto a = init_model<float>(c);
  const auto b = init_model<float>(c);
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t k = 0; k < ta.size(); ++k) {
    ASSERT_EQ(ta[k].size, tb[k].size);
    EXPECT_EQ(std::memcmp(ta[k].data, tb[k].data, ta[k].size * sizeof(float)), 0) << ta[k].name;
  }
  EXPECT_TRUE(a.conv1_bias.isZero());
  EXPECT_TRUE(a.lstm_bias.isZero());
  const double bound = std::sqrt(3.0 / c.char_emb_dim / c.kernel_size);
  EXPECT_LE(a.conv1_kernel.cwiseAbs().maxCoeff(), bound);
  ModelConfig c2 = c;
  c2.seed = c.seed + 100;
  EXPECT_NE(init_model<float>(c2).fc1_weight, a.fc1_weight);
}

TEST(Init, ParameterCountFormula) {
  for (const ModelConfig c : {ModelConfig{}, toy_model_config()}) {
    const long long E = c.char_emb_dim, k = c.kernel_size, F1 = c.conv1_filters,
                    F2 = c.conv2_filters, H = c.lstm_units, D = c.word_dim, U = c.fc1_units;
    const long long feat = static_cast<long long>(c.max_word_len) / (c.pool_size * c.pool_size) * F2;
    const long long expected = 258 * E + (k * E * F1 + F1) + (k * F1 * F2 + F2) +
                               4 * H * (feat + D) + 4 * H * H + 4 * H + (U * H + U) +
                               (2 * U + 2);
    EXPECT_EQ(static_cast<long long>(init_model<float>(c).parameter_count()), expected);
  }
}

TEST(CharFeatures, DimensionAndPoolingDepth) {
  ModelConfig c;
  c.max_word_len = 16;
  EXPECT_EQ(c.char_feature_dim(), 512);
  c.max_word_len = 2;
  try {
    c.validate();
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_STREQ(e.what(), "word length below pooling depth");
  }
}

TEST(CharFeatures, MatchesReferenceOnToySize) {
  ModelConfig c = toy_model_config();
  c.char_emb_dim = 2;
  c.conv1_filters = 2;
  c.conv2_filters = 2;
  c.max_word_len = 4;
  auto p = init_model<double>(c);
  jitter_biases(p, 1);
  const std::vector<std::int32_t> ab = {2, 3, 0, 0};
  const Matrix<double> got = char_word_features<double>(ab, 1, p, Mode::kEval);
  const auto want = ref_char_features(ab, p);
  ASSERT_EQ(got.cols(), static_cast<Eigen::Index>(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got(0, i), want[i], 1e-12);

  // All-PAD rows give the same vector whatever else is in the grid.
  const std::vector<std::int32_t> two = {0, 0, 0, 0, 5, 6, 7, 0};
  const Matrix<double> pads = char_word_features<double>(two, 2, p, Mode::kEval);
  const Matrix<double> alone =
      char_word_features<double>(std::span(two.data(), 4), 1, p, Mode::kEval);
  EXPECT_EQ(pads.row(0), alone.row(0));
}

TEST(Forward, MatchesReferenceImplementation) {
  ModelConfig c = toy_model_config();
  c.lstm_units = 4;
  c.fc1_units = 3;
  c.word_dim = 4;
  for (Readout ro : {Readout::kLast, Readout::kMean}) {
    c.readout = ro;
    auto p = init_model<double>(c);
    jitter_biases(p, 2);
    ToyData d = toy_data(4, 4);
    const auto batch = make_batch(std::span(d.examples.data(), 3), d.vocab, d.table, 8);
    const Matrix<double> logits = forward(batch, p, Mode::kEval);
    ASSERT_EQ(logits.rows(), 3);
    ASSERT_EQ(logits.cols(), 2);
    for (std::size_t b = 0; b < 3; ++b) {
      const auto want = ref_logits(batch, b, p);
      EXPECT_NEAR(logits(b, 0), want[0], 1e-10);
      EXPECT_NEAR(logits(b, 1), want[1], 1e-10);
    }
  }
}

TEST(Forward, ShapeAndDeterminism) {
  const ModelConfig c = toy_model_config();
  const auto p = init_model<float>(c);
  ToyData d = toy_data(3);
  std::vector<TokenizedExample> xs = {d.examples[1], d.examples[1], d.examples[2]};
  const auto batch = make_batch(xs, d.vocab, d.table, 8);
  const Matrix<float> logits = forward(batch, p, Mode::kEval);
  EXPECT_EQ(logits.rows(), 3);
  EXPECT_EQ(logits.row(0), logits.row(1));
}

TEST(Forward, DimensionMismatchIsAnError) {
  const auto p = init_model<float>(toy_model_config());
  ToyData d = toy_data(2, 7);
  const auto batch = make_batch(d.examples, d.vocab, d.table, 8);
  EXPECT_THROW(forward(batch, p, Mode::kEval), UsageError);
  ToyData e = toy_data(2);
  const auto wrong_len = make_batch(e.examples, e.vocab, e.table, 12);
  EXPECT_THROW(forward(wrong_len, p, Mode::kEval), UsageError);
}

TEST(Forward, PaddingInvariance) {
  const auto p = init_model<float>(toy_model_config());
  ToyData d = toy_data(6);
  TokenizedExample longer = d.examples[1];
  for (int i = 0; i < 10; ++i) longer.tokens.push_back(d.examples[2].tokens[0]);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::vector<TokenizedExample> alone = {d.examples[i]};
    const std::vector<TokenizedExample> padded = {d.examples[i], longer};
    const Matrix<float> a = forward(make_batch(alone, d.vocab, d.table, 8), p, Mode::kEval);
    const Matrix<float> b = forward(make_batch(padded, d.vocab, d.table, 8), p, Mode::kEval);
    EXPECT_NEAR(a(0, 0), b(0, 0), 1e-5);
    EXPECT_NEAR(a(0, 1), b(0, 1), 1e-5);
  }
}

TEST(Forward, KeepOneTrainEqualsEval) {
  ModelConfig c = toy_model_config();
  c.dropout_keep = 1.0;
  const auto p = init_model<double>(c);
  ToyData d = toy_data(4);
  const auto batch = make_batch(d.examples, d.vocab, d.table, 8);
  std::mt19937_64 rng(1);
  EXPECT_EQ(forward(batch, p, Mode::kTrain, &rng), forward(batch, p, Mode::kEval));
}

TEST(Loss, ClosedForms) {
  Matrix<double> z(1, 2);
  z << 0, 0;
  const int one[] = {1};
  EXPECT_NEAR(loss<double>(z, one), std::log(2.0), 1e-12);
  z << 10, -10;
  const int zero[] = {0};
  EXPECT_NEAR(loss<double>(z, zero), std::log1p(std::exp(-20.0)), 1e-15);
  EXPECT_NEAR(loss<double>(z, zero), 2.06e-9, 1e-11);
  Matrix<double> two(2, 2);
  two << 1, -1, -1, 1;
  const int labels[] = {0, 1};
  Matrix<double> single(1, 2);
  single << 1, -1;
  EXPECT_NEAR(loss<double>(two, labels), loss<double>(single, zero), 1e-15);
}

TEST(Softmax, RowsSumToOne) {
  Matrix<double> z(3, 2);
  z << 0, 0, 1000, -1000, -3, 2;
  const Matrix<double> s = softmax(z);
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(s.row(r).sum(), 1.0, 1e-15);
  EXPECT_NEAR(s(0, 0), 0.5, 1e-15);
}

void gradient_check(Mode mode, double keep) {
  ModelConfig c = toy_model_config();
  c.dropout_keep = keep;
  auto p = init_model<double>(c);
  jitter_biases(p, 3);
  ToyData d = toy_data(4);
  const auto batch = make_batch(d.examples, d.vocab, d.table, 8);
  ModelParams<double> grad;
  std::mt19937_64 rng(77);
  loss_and_gradient(batch, p, mode, &rng, grad);
  auto eval = [&]() {
    std::mt19937_64 r(77);
    return loss<double>(forward(batch, p, mode, &r), batch.labels);
  };
  auto pt = p.tensors();
  const auto gt = grad.tensors();
  const double h = 1e-5;
  for (std::size_t k = 0; k < pt.size(); ++k) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < pt[k].size; ++i) {
      const double saved = pt[k].data[i];
      pt[k].data[i] = saved + h;
      const double up = eval();
      pt[k].data[i] = saved - h;
      const double down = eval();
      pt[k].data[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = gt[k].data[i];
      diff2 += (numeric - analytic) * (numeric - analytic);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
    const double denom = std::sqrt(a2) + std::sqrt(n2);
    const double rel = denom > 0 ? std::sqrt(diff2) / denom : 0.0;
    EXPECT_LT(rel, 1e-4) << pt[k].name;
    EXPECT_GT(a2, 0.0) << pt[k].name << " has an all-zero gradient";
  }
}

TEST(Gradient, MatchesFiniteDifferencesEval) { gradient_check(Mode::kEval, 1.0); }
TEST(Gradient, MatchesFiniteDifferencesWithDropout) { gradient_check(Mode::kTrain, 0.5); }

TEST(Adam, FirstStepMovesByLearningRate) {
  ModelConfig c = toy_model_config();
  c.learning_rate = 0.01;
  auto p = init_model<double>(c);
  const auto before = p;
  auto g = ModelParams<double>::zeros(c);
  g.fc2_bias(0) = 3.0;
  g.fc2_bias(1) = -0.5;
  AdamOptimizer<double> adam(c);
  adam.step(p, g);
  // m_hat = g, v_hat = g^2: the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.fc2_bias(0), before.fc2_bias(0) - 0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p.fc2_bias(1), before.fc2_bias(1) + 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(p.fc1_weight, before.fc1_weight);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  ModelConfig c = toy_model_config();
  c.learning_rate = 0.0;
  c.max_epochs = 3;
  ToyData d = toy_data(20);
  const auto result = train<float>(d.examples, {}, c, d.vocab, d.table);
  const auto init = init_model<float>(c);
  const auto a = result.params.tensors();
  const auto b = init.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(std::memcmp(a[k].data, b[k].data, a[k].size * sizeof(float)), 0) << a[k].name;
  }
  EXPECT_EQ(result.history.best_epoch, 3);
  EXPECT_FALSE(result.history.warnings.empty());
}

TEST(Train, SeededRunsAreIdentical) {
  ModelConfig c = toy_model_config();
  c.max_epochs = 4;
  c.dropout_keep = 0.5;
  ToyData d = toy_data(40);
  std::vector<TokenizedExample> tr(d.examples.begin(), d.examples.begin() + 30);
  std::vector<TokenizedExample> va(d.examples.begin() + 30, d.examples.end());
  const auto a = train<float>(tr, va, c, d.vocab, d.table);
  const auto b = train<float>(tr, va, c, d.vocab, d.table);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.history.to_jsonl(), b.history.to_jsonl());
  EXPECT_EQ(a.params.fc2_weight, b.params.fc2_weight);
  EXPECT_EQ(a.params.char_embedding, b.params.char_embedding);
}

TEST(Train, OverfitsSmallSeparableCorpus) {
  ModelConfig c = toy_model_config();
  c.max_epochs = 200;
  ToyData d = toy_data(64);
  const auto start = std::chrono::steady_clock::now();
  double acc = 0.0;
  int epochs_needed = 0;
  const auto result = train<float>(d.examples, d.examples, c, d.vocab, d.table,
                                   [&](const EpochRecord& e) {
                                     if (!epochs_needed && e.val_accuracy >= 0.95)
                                       epochs_needed = e.epoch;
                                   });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<TokenList> toks;
  for (const auto& e : d.examples) toks.push_back(e.tokens);
  const auto preds = predict_tokens(result.params, toks, d.vocab, d.table);
  for (std::size_t i = 0; i < preds.size(); ++i) acc += preds[i].label == d.examples[i].label;
  acc /= static_cast<double>(preds.size());
  EXPECT_GE(acc, 0.95);
  EXPECT_GT(epochs_needed, 0);
  EXPECT_LT(seconds, 60.0);
}

TEST(Predict, TieRuleAndProbability) {
  const double zero[] = {0.0, 0.0};
  EXPECT_EQ(prediction_from_logits(zero), (Prediction{0, 0.5}));
  const double off[] = {-1.0, 1.0};
  const auto p = prediction_from_logits(off);
  EXPECT_EQ(p.label, 1);
  EXPECT_NEAR(p.probability, 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
}

TEST(Predict, BatchEqualsPerItem) {
  const auto p = init_model<float>(toy_model_config());
  ToyData d = toy_data(40);
  std::vector<TokenList> toks;
  for (const auto& e : d.examples) toks.push_back(e.tokens);
  const auto all = predict_tokens(p, toks, d.vocab, d.table);
  for (std::size_t i = 0; i < toks.size(); i += 7) {
    const auto one = predict_tokens(p, {toks[i]}, d.vocab, d.table);
    EXPECT_EQ(one[0].label, all[i].label);
    EXPECT_NEAR(one[0].probability, all[i].probability, 1e-6);
  }
}

TEST(Predict, FromRawTextRunsNormalization) {
  const auto p = init_model<float>(toy_model_config());
  ToyData d = toy_data(4);
  const auto lex = ObfuscationLexicon::defaults();
  PipelineContext ctx{&lex, {}, &d.vocab, &d.table};
  const auto raw = predict(p, {"you a$$hole", "you asshole"}, ctx);
  EXPECT_EQ(raw[0], raw[1]);
  PipelineContext missing;
  EXPECT_THROW(predict(p, {"x"}, missing), UsageError);
}

}  // namespace
}  // namespace offnet
