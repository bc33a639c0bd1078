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

#include "core/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "json.hpp"

namespace offnet {

std::string_view to_string(Readout r) { return r == Readout::kMean ? "mean" : "last"; }

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw UsageError(std::string("model config: ") + name + " must be >= 1");
  };
  positive(char_vocab_size, "char_vocab_size");
  positive(char_emb_dim, "char_emb_dim");
  positive(conv1_filters, "conv1_filters");
  positive(conv2_filters, "conv2_filters");
  positive(kernel_size, "kernel_size");
  positive(pool_size, "pool_size");
  positive(lstm_units, "lstm_units");
  positive(fc1_units, "fc1_units");
  positive(n_classes, "n_classes");
  positive(batch_size, "batch_size");
  positive(word_dim, "word_dim");
  if (max_epochs < 0) throw UsageError("model config: max_epochs must be >= 0");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw UsageError("model config: dropout_keep must be in (0, 1]");
  }
  if (!(learning_rate >= 0.0)) throw UsageError("model config: learning_rate must be >= 0");
  const int depth = pool_size * pool_size;
  if (max_word_len < depth) throw UsageError("word length below pooling depth");
  if (max_word_len % depth != 0) {
    throw UsageError("model config: max_word_len must be a multiple of " +
                     std::to_string(depth));
  }
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig& c) {
  ModelParams<T> p;
  p.config = c;
  const int h4 = 4 * c.lstm_units;
  p.char_embedding = Matrix<T>::Zero(c.char_vocab_size, c.char_emb_dim);
  p.conv1_kernel = Matrix<T>::Zero(c.kernel_size * c.char_emb_dim, c.conv1_filters);
  p.conv1_bias = Vector<T>::Zero(c.conv1_filters);
  p.conv2_kernel = Matrix<T>::Zero(c.kernel_size * c.conv1_filters, c.conv2_filters);
  p.conv2_bias = Vector<T>::Zero(c.conv2_filters);
  p.lstm_input = Matrix<T>::Zero(h4, c.lstm_input_dim());
  p.lstm_recurrent = Matrix<T>::Zero(h4, c.lstm_units);
  p.lstm_bias = Vector<T>::Zero(h4);
  p.fc1_weight = Matrix<T>::Zero(c.fc1_units, c.lstm_units);
  p.fc1_bias = Vector<T>::Zero(c.fc1_units);
  p.fc2_weight = Matrix<T>::Zero(c.n_classes, c.fc1_units);
  p.fc2_bias = Vector<T>::Zero(c.n_classes);
  return p;
}

namespace {

template <typename P, typename V>
std::vector<V> collect_tensors(P& p) {
  std::vector<V> out;
  auto mat = [&](std::string_view name, auto& m) {
    out.push_back({name, m.data(), static_cast<std::size_t>(m.size()),
                   {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())}});
  };
  auto vec = [&](std::string_view name, auto& v) {
    out.push_back({name, v.data(), static_cast<std::size_t>(v.size()),
                   {static_cast<std::int64_t>(v.size())}});
  };
  mat("char_embedding", p.char_embedding);
  mat("conv1_kernel", p.conv1_kernel);
  vec("conv1_bias", p.conv1_bias);
  mat("conv2_kernel", p.conv2_kernel);
  vec("conv2_bias", p.conv2_bias);
  mat("lstm_input", p.lstm_input);
  mat("lstm_recurrent", p.lstm_recurrent);
  vec("lstm_bias", p.lstm_bias);
  mat("fc1_weight", p.fc1_weight);
  vec("fc1_bias", p.fc1_bias);
  mat("fc2_weight", p.fc2_weight);
  vec("fc2_bias", p.fc2_bias);
  return out;
}

}  // namespace

template <typename T>
std::vector<TensorView<T>> ModelParams<T>::tensors() {
  return collect_tensors<ModelParams<T>, TensorView<T>>(*this);
}

template <typename T>
std::vector<TensorView<const T>> ModelParams<T>::tensors() const {
  return collect_tensors<const ModelParams<T>, TensorView<const T>>(*this);
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.size;
  return n;
}

template <typename T>
ModelParams<T> init_model(const ModelConfig& config) {
  config.validate();
  ModelParams<T> p = ModelParams<T>::zeros(config);
  std::mt19937_64 rng(config.seed);
  auto fill = [&](auto& m, int fan_in) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<T>(bound * dist(rng));
    }
  };
  fill(p.char_embedding, config.char_emb_dim);
  fill(p.conv1_kernel, config.kernel_size * config.char_emb_dim);
  fill(p.conv2_kernel, config.kernel_size * config.conv1_filters);
  fill(p.lstm_input, config.lstm_input_dim());
  fill(p.lstm_recurrent, config.lstm_units);
  fill(p.fc1_weight, config.lstm_units);
  fill(p.fc2_weight, config.fc1_units);
  return p;
}

namespace {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Rows of `x` come in segments of `seg` positions (one segment per word).
// Column block j of row (w, t) holds x(w, t + j - pad_before), zero outside
// the segment.
template <typename T>
Matrix<T> im2col(const Matrix<T>& x, Eigen::Index seg, int k, int pad_before) {
  const Eigen::Index cin = x.cols();
  Matrix<T> out = Matrix<T>::Zero(x.rows(), k * cin);
  const Eigen::Index words = x.rows() / seg;
  for (Eigen::Index w = 0; w < words; ++w) {
    for (Eigen::Index t = 0; t < seg; ++t) {
      for (int j = 0; j < k; ++j) {
        const Eigen::Index src = t + j - pad_before;
        if (src < 0 || src >= seg) continue;
        out.block(w * seg + t, j * cin, 1, cin) = x.row(w * seg + src);
      }
    }
  }
  return out;
}

template <typename T>
Matrix<T> col2im(const Matrix<T>& dcol, Eigen::Index seg, int k, int pad_before,
                 Eigen::Index cin) {
  Matrix<T> dx = Matrix<T>::Zero(dcol.rows(), cin);
  const Eigen::Index words = dcol.rows() / seg;
  for (Eigen::Index w = 0; w < words; ++w) {
    for (Eigen::Index t = 0; t < seg; ++t) {
      for (int j = 0; j < k; ++j) {
        const Eigen::Index src = t + j - pad_before;
        if (src < 0 || src >= seg) continue;
        dx.row(w * seg + src) += dcol.block(w * seg + t, j * cin, 1, cin);
      }
    }
  }
  return dx;
}

// Non-overlapping max pooling of width p within each segment. `arg` records
// the winning input row per output element (first maximum on ties).
template <typename T>
Matrix<T> max_pool(const Matrix<T>& y, Eigen::Index seg, int p,
                   std::vector<Eigen::Index>& arg) {
  const Eigen::Index out_seg = seg / p;
  const Eigen::Index words = y.rows() / seg;
  Matrix<T> out(words * out_seg, y.cols());
  arg.resize(static_cast<size_t>(out.size()));
  for (Eigen::Index w = 0; w < words; ++w) {
    for (Eigen::Index s = 0; s < out_seg; ++s) {
      const Eigen::Index orow = w * out_seg + s;
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        Eigen::Index best = w * seg + s * p;
        for (int q = 1; q < p; ++q) {
          const Eigen::Index r = w * seg + s * p + q;
          if (y(r, c) > y(best, c)) best = r;
        }
        out(orow, c) = y(best, c);
        arg[static_cast<size_t>(orow * y.cols() + c)] = best;
      }
    }
  }
  return out;
}

template <typename T>
Matrix<T> max_unpool(const Matrix<T>& dout, const std::vector<Eigen::Index>& arg,
                     Eigen::Index in_rows) {
  Matrix<T> dy = Matrix<T>::Zero(in_rows, dout.cols());
  for (Eigen::Index r = 0; r < dout.rows(); ++r) {
    for (Eigen::Index c = 0; c < dout.cols(); ++c) {
      dy(arg[static_cast<size_t>(r * dout.cols() + c)], c) += dout(r, c);
    }
  }
  return dy;
}

// Inverted dropout mask: entries are 0 or 1/keep.
template <typename T>
Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double keep,
                       std::mt19937_64& rng) {
  Matrix<T> m(rows, cols);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const T scale = static_cast<T>(1.0 / keep);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = dist(rng) < keep ? scale : T(0);
  }
  return m;
}

template <typename T>
struct CnnCache {
  std::vector<std::int32_t> indices;
  Matrix<T> col1, act1, col2, act2;
  std::vector<Eigen::Index> arg1, arg2;
  Matrix<T> mask;  // dropout on flattened features, empty in eval mode
};

template <typename T>
Matrix<T> cnn_forward(std::span<const std::int32_t> chars, std::size_t words,
                      const ModelParams<T>& params, Mode mode, std::mt19937_64* rng,
                      CnnCache<T>& cache) {
  const ModelConfig& cfg = params.config;
  const Eigen::Index len = cfg.max_word_len;
  const int k = cfg.kernel_size;
  const int pad = (k - 1) / 2;
  const int p = cfg.pool_size;
  if (chars.size() != words * static_cast<size_t>(len)) {
    throw UsageError("char grid does not match max_word_len");
  }
  cache.indices.assign(chars.begin(), chars.end());
  Matrix<T> x(static_cast<Eigen::Index>(words) * len, cfg.char_emb_dim);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const std::int32_t idx = chars[static_cast<size_t>(r)];
    if (idx < 0 || idx >= cfg.char_vocab_size) {
      throw UsageError("character index " + std::to_string(idx) +
                       " outside the embedding table");
    }
    x.row(r) = params.char_embedding.row(idx);
  }
  cache.col1 = im2col(x, len, k, pad);
  cache.act1 = ((cache.col1 * params.conv1_kernel).rowwise() +
                params.conv1_bias.transpose()).cwiseMax(T(0));
  Matrix<T> pooled1 = max_pool(cache.act1, len, p, cache.arg1);
  cache.col2 = im2col(pooled1, len / p, k, pad);
  cache.act2 = ((cache.col2 * params.conv2_kernel).rowwise() +
                params.conv2_bias.transpose()).cwiseMax(T(0));
  Matrix<T> pooled2 = max_pool(cache.act2, len / p, p, cache.arg2);
  // Row-major storage makes [words * L', F] and [words, L' * F] the same bytes.
  Matrix<T> feat = Eigen::Map<Matrix<T>>(pooled2.data(), static_cast<Eigen::Index>(words),
                                         cfg.char_feature_dim());
  if (mode == Mode::kTrain) {
    if (!rng) throw UsageError("train mode needs a random engine");
    cache.mask = dropout_mask<T>(feat.rows(), feat.cols(), cfg.dropout_keep, *rng);
    feat = feat.cwiseProduct(cache.mask);
  } else {
    cache.mask.resize(0, 0);
  }
  return feat;
}

template <typename T>
void cnn_backward(const Matrix<T>& dfeat_in, const ModelParams<T>& params,
                  const CnnCache<T>& cache, ModelParams<T>& grad) {
  const ModelConfig& cfg = params.config;
  const Eigen::Index len = cfg.max_word_len;
  const int k = cfg.kernel_size;
  const int pad = (k - 1) / 2;
  const int p = cfg.pool_size;
  const Eigen::Index words = dfeat_in.rows();

  Matrix<T> dfeat = cache.mask.size() ? dfeat_in.cwiseProduct(cache.mask) : dfeat_in;
  Matrix<T> dpool2 = Eigen::Map<const Matrix<T>>(dfeat.data(), words * (len / (p * p)),
                                                 cfg.conv2_filters);
  Matrix<T> dact2 = max_unpool(dpool2, cache.arg2, cache.act2.rows());
  dact2 = dact2.cwiseProduct((cache.act2.array() > T(0)).template cast<T>().matrix());
  grad.conv2_kernel.noalias() += cache.col2.transpose() * dact2;
  grad.conv2_bias += dact2.colwise().sum().transpose();
  Matrix<T> dcol2 = dact2 * params.conv2_kernel.transpose();
  Matrix<T> dpool1 = col2im(dcol2, len / p, k, pad, cfg.conv1_filters);
  Matrix<T> dact1 = max_unpool(dpool1, cache.arg1, cache.act1.rows());
  dact1 = dact1.cwiseProduct((cache.act1.array() > T(0)).template cast<T>().matrix());
  grad.conv1_kernel.noalias() += cache.col1.transpose() * dact1;
  grad.conv1_bias += dact1.colwise().sum().transpose();
  Matrix<T> dcol1 = dact1 * params.conv1_kernel.transpose();
  Matrix<T> dx = col2im(dcol1, len, k, pad, cfg.char_emb_dim);
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    grad.char_embedding.row(cache.indices[static_cast<size_t>(r)]) += dx.row(r);
  }
}

template <typename T>
struct ExampleCache {
  CnnCache<T> cnn;
  Matrix<T> z;          // LSTM inputs after dropout, [n, in]
  Matrix<T> word_mask;  // dropout on word vectors
  Matrix<T> gates;      // activated i, f, g, o per step, [n, 4H]
  Matrix<T> cells;      // [n, H]
  Matrix<T> cell_tanh;  // [n, H]
  Matrix<T> hidden;     // [n, H]
  Vector<T> readout;    // after dropout
  Vector<T> readout_mask;
  Vector<T> fc1_pre;
  Vector<T> fc1_out;    // after ReLU and dropout
  Vector<T> fc1_mask;
};

template <typename T>
Vector<T> forward_example(const EncodedBatch& batch, std::size_t b,
                          const ModelParams<T>& params, Mode mode,
                          std::mt19937_64* rng, ExampleCache<T>& cache) {
  const ModelConfig& cfg = params.config;
  const Eigen::Index hsz = cfg.lstm_units;
  const Eigen::Index fdim = cfg.char_feature_dim();
  const Eigen::Index dim = cfg.word_dim;
  const bool training = mode == Mode::kTrain;

  std::vector<std::size_t> positions;
  for (std::size_t w = 0; w < batch.max_words; ++w) {
    if (batch.has_word(b, w)) positions.push_back(w);
  }
  if (positions.empty()) {
    throw UsageError("example " + std::to_string(b) + " has no unmasked words");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());

  std::vector<std::int32_t> chars;
  chars.reserve(positions.size() * batch.max_word_len);
  Matrix<T> words(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto c = batch.chars_of(b, positions[i]);
    chars.insert(chars.end(), c.begin(), c.end());
    auto v = batch.vector_of(b, positions[i]);
    for (Eigen::Index d = 0; d < dim; ++d) words(i, d) = static_cast<T>(v[d]);
  }

  Matrix<T> feat = cnn_forward(std::span<const std::int32_t>(chars), positions.size(),
                               params, mode, rng, cache.cnn);
  if (training) {
    cache.word_mask = dropout_mask<T>(n, dim, cfg.dropout_keep, *rng);
    words = words.cwiseProduct(cache.word_mask);
  }
  cache.z.resize(n, fdim + dim);
  cache.z.leftCols(fdim) = feat;
  cache.z.rightCols(dim) = words;

  Matrix<T> pre = (cache.z * params.lstm_input.transpose()).rowwise() +
                  params.lstm_bias.transpose();
  cache.gates.resize(n, 4 * hsz);
  cache.cells.resize(n, hsz);
  cache.cell_tanh.resize(n, hsz);
  cache.hidden.resize(n, hsz);
  Eigen::Matrix<T, 1, Eigen::Dynamic> h = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(hsz);
  Eigen::Matrix<T, 1, Eigen::Dynamic> c = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(hsz);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::Matrix<T, 1, Eigen::Dynamic> g = pre.row(t) + h * params.lstm_recurrent.transpose();
    for (Eigen::Index j = 0; j < hsz; ++j) {
      g(j) = sigmoid(g(j));
      g(hsz + j) = sigmoid(g(hsz + j));
      g(2 * hsz + j) = std::tanh(g(2 * hsz + j));
      g(3 * hsz + j) = sigmoid(g(3 * hsz + j));
    }
    c = g.segment(hsz, hsz).cwiseProduct(c) +
        g.segment(0, hsz).cwiseProduct(g.segment(2 * hsz, hsz));
    Eigen::Matrix<T, 1, Eigen::Dynamic> ct = c.array().tanh().matrix();
    h = g.segment(3 * hsz, hsz).cwiseProduct(ct);
    cache.gates.row(t) = g;
    cache.cells.row(t) = c;
    cache.cell_tanh.row(t) = ct;
    cache.hidden.row(t) = h;
  }

  Vector<T> r = cfg.readout == Readout::kLast
                    ? Vector<T>(cache.hidden.row(n - 1).transpose())
                    : Vector<T>(cache.hidden.colwise().mean().transpose());
  if (training) {
    cache.readout_mask = dropout_mask<T>(hsz, 1, cfg.dropout_keep, *rng);
    r = r.cwiseProduct(cache.readout_mask);
  }
  cache.readout = r;
  cache.fc1_pre = params.fc1_weight * r + params.fc1_bias;
  Vector<T> a = cache.fc1_pre.cwiseMax(T(0));
  if (training) {
    cache.fc1_mask = dropout_mask<T>(cfg.fc1_units, 1, cfg.dropout_keep, *rng);
    a = a.cwiseProduct(cache.fc1_mask);
  }
  cache.fc1_out = a;
  return params.fc2_weight * a + params.fc2_bias;
}

template <typename T>
void backward_example(const Vector<T>& dlogits, const ModelParams<T>& params,
                      const ExampleCache<T>& cache, bool training, ModelParams<T>& grad) {
  const ModelConfig& cfg = params.config;
  const Eigen::Index hsz = cfg.lstm_units;
  const Eigen::Index fdim = cfg.char_feature_dim();
  const Eigen::Index n = cache.hidden.rows();

  grad.fc2_weight.noalias() += dlogits * cache.fc1_out.transpose();
  grad.fc2_bias += dlogits;
  Vector<T> da = params.fc2_weight.transpose() * dlogits;
  if (training) da = da.cwiseProduct(cache.fc1_mask);
  da = da.cwiseProduct((cache.fc1_pre.array() > T(0)).template cast<T>().matrix());
  grad.fc1_weight.noalias() += da * cache.readout.transpose();
  grad.fc1_bias += da;
  Vector<T> dr = params.fc1_weight.transpose() * da;
  if (training) dr = dr.cwiseProduct(cache.readout_mask);

  Matrix<T> dh_out = Matrix<T>::Zero(n, hsz);
  if (cfg.readout == Readout::kLast) {
    dh_out.row(n - 1) = dr.transpose();
  } else {
    dh_out.rowwise() += (dr / static_cast<T>(n)).transpose();
  }

  Matrix<T> dgates(n, 4 * hsz);
  Eigen::Matrix<T, 1, Eigen::Dynamic> dh_next = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(hsz);
  Eigen::Matrix<T, 1, Eigen::Dynamic> dc_next = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(hsz);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const auto g = cache.gates.row(t);
    Eigen::Matrix<T, 1, Eigen::Dynamic> dh = dh_out.row(t) + dh_next;
    Eigen::Matrix<T, 1, Eigen::Dynamic> dc = dc_next;
    for (Eigen::Index j = 0; j < hsz; ++j) {
      const T i = g(j), f = g(hsz + j), cc = g(2 * hsz + j), o = g(3 * hsz + j);
      const T ct = cache.cell_tanh(t, j);
      const T c_prev = t > 0 ? cache.cells(t - 1, j) : T(0);
      dc(j) += dh(j) * o * (T(1) - ct * ct);
      dgates(t, j) = dc(j) * cc * i * (T(1) - i);
      dgates(t, hsz + j) = dc(j) * c_prev * f * (T(1) - f);
      dgates(t, 2 * hsz + j) = dc(j) * i * (T(1) - cc * cc);
      dgates(t, 3 * hsz + j) = dh(j) * ct * o * (T(1) - o);
      dc(j) *= f;
    }
    dc_next = dc;
    if (t > 0) {
      grad.lstm_recurrent.noalias() += dgates.row(t).transpose() * cache.hidden.row(t - 1);
    }
    dh_next = dgates.row(t) * params.lstm_recurrent;
  }
  grad.lstm_input.noalias() += dgates.transpose() * cache.z;
  grad.lstm_bias += dgates.colwise().sum().transpose();
  Matrix<T> dz = dgates * params.lstm_input;
  // Word vectors are frozen; only the character branch receives gradient.
  cnn_backward<T>(dz.leftCols(fdim), params, cache.cnn, grad);
}

template <typename T>
void check_batch(const EncodedBatch& batch, const ModelConfig& cfg) {
  if (batch.max_word_len != static_cast<std::size_t>(cfg.max_word_len)) {
    throw UsageError("batch max_word_len " + std::to_string(batch.max_word_len) +
                     " does not match model " + std::to_string(cfg.max_word_len));
  }
  if (batch.dim != static_cast<std::size_t>(cfg.word_dim)) {
    throw UsageError("batch word dimension " + std::to_string(batch.dim) +
                     " does not match model " + std::to_string(cfg.word_dim));
  }
}

}  // namespace

template <typename T>
Matrix<T> char_word_features(std::span<const std::int32_t> char_indices,
                             std::size_t words, const ModelParams<T>& params,
                             Mode mode, std::mt19937_64* rng) {
  params.config.validate();
  CnnCache<T> cache;
  return cnn_forward(char_indices, words, params, mode, rng, cache);
}

template <typename T>
Matrix<T> forward(const EncodedBatch& batch, const ModelParams<T>& params,
                  Mode mode, std::mt19937_64* rng) {
  check_batch<T>(batch, params.config);
  if (mode == Mode::kTrain && !rng) throw UsageError("train mode needs a random engine");
  Matrix<T> logits(static_cast<Eigen::Index>(batch.batch), params.config.n_classes);
  ExampleCache<T> cache;
  for (std::size_t b = 0; b < batch.batch; ++b) {
    logits.row(static_cast<Eigen::Index>(b)) =
        forward_example(batch, b, params, mode, rng, cache).transpose();
  }
  return logits;
}

template <typename T>
Matrix<T> softmax(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T m = logits.row(r).maxCoeff();
    auto e = (logits.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

template <typename T>
T loss(const Matrix<T>& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw UsageError("loss: label count does not match logits");
  }
  if (labels.empty()) return T(0);
  T total = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= logits.cols()) throw UsageError("loss: label out of range");
    const T m = logits.row(r).maxCoeff();
    const T lse = m + std::log((logits.row(r).array() - m).exp().sum());
    total += lse - logits(r, y);
  }
  return total / static_cast<T>(logits.rows());
}

template <typename T>
T loss_and_gradient(const EncodedBatch& batch, const ModelParams<T>& params,
                    Mode mode, std::mt19937_64* rng, ModelParams<T>& grad) {
  check_batch<T>(batch, params.config);
  if (batch.labels.size() != batch.batch) throw UsageError("batch has no labels");
  if (mode == Mode::kTrain && !rng) throw UsageError("train mode needs a random engine");
  grad = ModelParams<T>::zeros(params.config);
  const T inv_b = T(1) / static_cast<T>(batch.batch);
  T total = 0;
  ExampleCache<T> cache;
  for (std::size_t b = 0; b < batch.batch; ++b) {
    Vector<T> logits = forward_example(batch, b, params, mode, rng, cache);
    const int y = batch.labels[b];
    if (y < 0 || y >= logits.size()) throw UsageError("label out of range");
    const T m = logits.maxCoeff();
    Vector<T> p = (logits.array() - m).exp().matrix();
    const T z = p.sum();
    p /= z;
    total += m + std::log(z) - logits(y);
    Vector<T> dlogits = p;
    dlogits(y) -= T(1);
    dlogits *= inv_b;
    backward_example<T>(dlogits, params, cache, mode == Mode::kTrain, grad);
  }
  return total * inv_b;
}

template <typename T>
AdamOptimizer<T>::AdamOptimizer(const ModelConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_epsilon),
      m_(ModelParams<T>::zeros(config)),
      v_(ModelParams<T>::zeros(config)) {}

template <typename T>
void AdamOptimizer<T>::step(ModelParams<T>& params, const ModelParams<T>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.tensors();
  auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size; ++i) {
      const double gi = static_cast<double>(g[k].data[i]);
      const double mi = beta1_ * static_cast<double>(m[k].data[i]) + (1.0 - beta1_) * gi;
      const double vi = beta2_ * static_cast<double>(v[k].data[i]) + (1.0 - beta2_) * gi * gi;
      m[k].data[i] = static_cast<T>(mi);
      v[k].data[i] = static_cast<T>(vi);
      const double update = lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_);
      p[k].data[i] -= static_cast<T>(update);
    }
  }
}

std::string TrainHistory::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["val_macro_f1"] = e.val_macro_f1;
    j["val_accuracy"] = e.val_accuracy;
    j["best"] = e.epoch == best_epoch;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

template <typename T>
std::vector<int> predict_labels(const ModelParams<T>& params,
                                const std::vector<TokenizedExample>& data,
                                const CharVocabulary& vocab, const EmbeddingTable& table) {
  std::vector<int> out;
  out.reserve(data.size());
  const std::size_t bs = static_cast<std::size_t>(params.config.batch_size);
  for (std::size_t start = 0; start < data.size(); start += bs) {
    const std::size_t end = std::min(data.size(), start + bs);
    EncodedBatch batch = make_batch(std::span<const TokenizedExample>(data.data() + start, end - start),
                                    vocab, table, static_cast<std::size_t>(params.config.max_word_len));
    Matrix<T> logits = forward(batch, params, Mode::kEval);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < logits.cols(); ++c) {
        if (logits(r, c) > logits(r, best)) best = c;
      }
      out.push_back(static_cast<int>(best));
    }
  }
  return out;
}

}  // namespace

template <typename T>
TrainResult<T> train(const std::vector<TokenizedExample>& train_set,
                     const std::vector<TokenizedExample>& val_set,
                     const ModelConfig& config, const CharVocabulary& vocab,
                     const EmbeddingTable& table, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  if (table.dim() != config.word_dim) {
    throw UsageError("embedding dimension " + std::to_string(table.dim()) +
                     " does not match word_dim " + std::to_string(config.word_dim));
  }
  for (const auto& ex : train_set) {
    if (ex.label < 0 || ex.label >= config.n_classes) {
      throw DataError("train: example label out of range");
    }
  }

  TrainResult<T> result{init_model<T>(config), {}};
  ModelParams<T> params = result.params;
  AdamOptimizer<T> adam(config);
  ModelParams<T> grad;
  std::mt19937_64 shuffle_rng(config.seed + 1);
  std::mt19937_64 dropout_rng(config.seed + 2);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::string> class_labels;
  for (int c = 0; c < config.n_classes; ++c) class_labels.push_back(std::to_string(c));
  std::vector<int> val_gold;
  for (const auto& ex : val_set) val_gold.push_back(ex.label);

  TrainHistory& history = result.history;
  std::optional<double> best_f1;
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  std::vector<TokenizedExample> chunk;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      chunk.clear();
      for (std::size_t i = start; i < end; ++i) chunk.push_back(train_set[order[i]]);
      EncodedBatch batch = make_batch(std::span<const TokenizedExample>(chunk), vocab,
                                      table, static_cast<std::size_t>(config.max_word_len));
      if (epoch == 1) {
        history.warnings.insert(history.warnings.end(), batch.warnings.begin(),
                                batch.warnings.end());
      }
      const T l = loss_and_gradient(batch, params, Mode::kTrain, &dropout_rng, grad);
      if (!std::isfinite(static_cast<double>(l))) {
        throw NumericError("non-finite training loss in epoch " + std::to_string(epoch));
      }
      loss_sum += static_cast<double>(l) * static_cast<double>(end - start);
      adam.step(params, grad);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    if (!val_set.empty()) {
      std::vector<int> pred = predict_labels(params, val_set, vocab, table);
      MetricsReport rep = report(confusion(val_gold, pred, class_labels));
      rec.val_macro_f1 = rep.macro_f1;
      rec.val_accuracy = rep.accuracy;
      if (!best_f1 || rep.macro_f1 > *best_f1) {
        best_f1 = rep.macro_f1;
        history.best_epoch = epoch;
        result.params = params;
      }
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (val_set.empty()) {
    history.warnings.push_back("validation set is empty; keeping the final epoch");
    history.best_epoch = config.max_epochs;
    result.params = params;
  }
  return result;
}

Prediction prediction_from_logits(std::span<const double> logits) {
  if (logits.empty()) throw UsageError("prediction_from_logits: no logits");
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l - logits[best]);
  return {static_cast<int>(best), 1.0 / z};
}

template <typename T>
std::vector<Prediction> predict_tokens(const ModelParams<T>& params,
                                       const std::vector<TokenList>& tokens,
                                       const CharVocabulary& vocab,
                                       const EmbeddingTable& table) {
  std::vector<Prediction> out;
  out.reserve(tokens.size());
  const std::size_t bs = static_cast<std::size_t>(params.config.batch_size);
  std::vector<TokenizedExample> chunk;
  std::vector<double> row(static_cast<std::size_t>(params.config.n_classes));
  for (std::size_t start = 0; start < tokens.size(); start += bs) {
    const std::size_t end = std::min(tokens.size(), start + bs);
    chunk.clear();
    for (std::size_t i = start; i < end; ++i) chunk.push_back({tokens[i], -1});
    EncodedBatch batch = make_batch(std::span<const TokenizedExample>(chunk), vocab,
                                    table, static_cast<std::size_t>(params.config.max_word_len));
    Matrix<T> logits = forward(batch, params, Mode::kEval);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = static_cast<double>(logits(r, c));
      }
      out.push_back(prediction_from_logits(row));
    }
  }
  return out;
}

template <typename T>
std::vector<Prediction> predict(const ModelParams<T>& params,
                                const std::vector<std::string>& texts,
                                const PipelineContext& context) {
  if (!context.lexicon || !context.vocab || !context.table) {
    throw UsageError("predict: incomplete pipeline context");
  }
  std::vector<TokenList> tokens;
  tokens.reserve(texts.size());
  for (const auto& t : texts) {
    tokens.push_back(normalize_text(t, *context.lexicon, context.options));
  }
  return predict_tokens(params, tokens, *context.vocab, *context.table);
}

#define OFFNET_INSTANTIATE(T)                                                        \
  template struct ModelParams<T>;                                                    \
  template ModelParams<T> init_model<T>(const ModelConfig&);                         \
  template Matrix<T> char_word_features<T>(std::span<const std::int32_t>,            \
                                           std::size_t, const ModelParams<T>&, Mode, \
                                           std::mt19937_64*);                        \
  template Matrix<T> forward<T>(const EncodedBatch&, const ModelParams<T>&, Mode,    \
                                std::mt19937_64*);                                   \
  template T loss<T>(const Matrix<T>&, std::span<const int>);                        \
  template Matrix<T> softmax<T>(const Matrix<T>&);                                   \
  template T loss_and_gradient<T>(const EncodedBatch&, const ModelParams<T>&, Mode,  \
                                  std::mt19937_64*, ModelParams<T>&);                \
  template class AdamOptimizer<T>;                                                   \
  template TrainResult<T> train<T>(const std::vector<TokenizedExample>&,             \
                                   const std::vector<TokenizedExample>&,             \
                                   const ModelConfig&, const CharVocabulary&,        \
                                   const EmbeddingTable&, const EpochCallback&);     \
  template std::vector<Prediction> predict_tokens<T>(                                \
      const ModelParams<T>&, const std::vector<TokenList>&, const CharVocabulary&,   \
      const EmbeddingTable&);                                                        \
  template std::vector<Prediction> predict<T>(const ModelParams<T>&,                 \
                                              const std::vector<std::string>&,       \
                                              const PipelineContext&);

OFFNET_INSTANTIATE(float)
OFFNET_INSTANTIATE(double)

#undef OFFNET_INSTANTIATE

}  // namespace offnet
