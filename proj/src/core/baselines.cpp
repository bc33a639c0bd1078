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

#include "core/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "core/lexnorm.hpp"
#include "core/text_util.hpp"

namespace offnet {

void SparseMatrix::add_row(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [c, v] : entries) {
    indices.push_back(c);
    values.push_back(v);
  }
  row_ptr.push_back(indices.size());
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense) {
  SparseMatrix m;
  m.cols = static_cast<std::size_t>(dense.cols());
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(static_cast<std::size_t>(dense.cols()));
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      row.emplace_back(static_cast<std::uint32_t>(c), dense(r, c));
    }
    m.add_row(std::move(row));
  }
  return m;
}

std::vector<std::string> NgramFeaturizer::word_ngrams(const std::string& text) const {
  std::vector<std::string> tokens = tokenize_tweet(text);
  for (auto& t : tokens) t = text::ascii_lower(t);
  std::vector<std::string> out;
  for (int n = ranges_.word_min; n <= ranges_.word_max; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (int k = 1; k < n; ++k) g += " " + tokens[i + k];
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<std::string> NgramFeaturizer::char_ngrams(const std::string& text) const {
  std::string collapsed;
  bool in_space = false;
  for (char c : text::ascii_lower(text)) {
    if (text::is_space(c)) {
      if (!in_space) collapsed.push_back(' ');
      in_space = true;
    } else {
      collapsed.push_back(c);
      in_space = false;
    }
  }
  const auto cps = text::decode_utf8(collapsed);
  std::vector<std::string> out;
  for (int n = ranges_.char_min; n <= ranges_.char_max; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (int k = 0; k < n; ++k) text::append_utf8(g, cps[i + k]);
      out.push_back(std::move(g));
    }
  }
  return out;
}

void NgramFeaturizer::index() {
  word_index_.clear();
  char_index_.clear();
  for (std::size_t i = 0; i < word_vocab_.size(); ++i) {
    word_index_.emplace(word_vocab_[i], static_cast<std::uint32_t>(i));
  }
  for (std::size_t i = 0; i < char_vocab_.size(); ++i) {
    char_index_.emplace(char_vocab_[i], static_cast<std::uint32_t>(i));
  }
}

NgramFeaturizer NgramFeaturizer::fit(const std::vector<std::string>& texts,
                                     const NgramRanges& ranges) {
  if (texts.empty()) throw DataError("featurizer: empty corpus");
  NgramFeaturizer f;
  f.ranges_ = ranges;
  std::map<std::string, std::size_t> df;
  std::map<std::string, bool> chars;
  for (const auto& t : texts) {
    auto grams = f.word_ngrams(t);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[g];
    for (auto& g : f.char_ngrams(t)) chars.emplace(std::move(g), true);
  }
  const double n = static_cast<double>(texts.size());
  for (const auto& [g, count] : df) {
    f.word_vocab_.push_back(g);
    f.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  for (const auto& kv : chars) f.char_vocab_.push_back(kv.first);
  f.index();
  return f;
}

NgramFeaturizer NgramFeaturizer::from_parts(std::vector<std::string> word_vocab,
                                            std::vector<double> idf,
                                            std::vector<std::string> char_vocab,
                                            const NgramRanges& ranges) {
  if (word_vocab.size() != idf.size()) {
    throw DataError("featurizer: idf length does not match word vocabulary");
  }
  NgramFeaturizer f;
  f.ranges_ = ranges;
  f.word_vocab_ = std::move(word_vocab);
  f.idf_ = std::move(idf);
  f.char_vocab_ = std::move(char_vocab);
  f.index();
  return f;
}

SparseMatrix NgramFeaturizer::transform(const std::vector<std::string>& texts) const {
  SparseMatrix m;
  m.cols = dim();
  const auto offset = static_cast<std::uint32_t>(word_dim());
  for (const auto& t : texts) {
    std::map<std::uint32_t, double> word_tf;
    for (const auto& g : word_ngrams(t)) {
      if (auto it = word_index_.find(g); it != word_index_.end()) word_tf[it->second] += 1.0;
    }
    double norm = 0.0;
    for (auto& [c, v] : word_tf) {
      v *= idf_[c];
      norm += v * v;
    }
    norm = std::sqrt(norm);
    std::vector<std::pair<std::uint32_t, double>> row;
    for (const auto& [c, v] : word_tf) row.emplace_back(c, v / norm);
    std::map<std::uint32_t, double> char_tf;
    for (const auto& g : char_ngrams(t)) {
      if (auto it = char_index_.find(g); it != char_index_.end()) char_tf[it->second] += 1.0;
    }
    for (const auto& [c, v] : char_tf) row.emplace_back(offset + c, v);
    m.add_row(std::move(row));
  }
  return m;
}

double LinearModel::decision(std::span<const std::uint32_t> idx,
                             std::span<const double> val) const {
  double s = bias;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < weights.size()) s += weights[idx[k]] * val[k];
  }
  return s;
}

double LinearModel::decision(const SparseMatrix& x, std::size_t row) const {
  return decision(x.row_indices(row), x.row_values(row));
}

int LinearModel::predict(const SparseMatrix& x, std::size_t row) const {
  return decision(x, row) > 0.0 ? 1 : 0;
}

std::vector<int> LinearModel::predict(const SparseMatrix& x) const {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x, r);
  return out;
}

double regularized_objective(const LinearModel& model, const SparseMatrix& x,
                             std::span<const int> y) {
  double hinge = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double sign = y[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - sign * model.decision(x, r));
  }
  double l1 = 0.0, l2 = 0.0;
  for (double w : model.weights) {
    l1 += std::abs(w);
    l2 += w * w;
  }
  const double rho = model.hyper.l1_ratio;
  return hinge / static_cast<double>(std::max<std::size_t>(1, x.rows())) +
         model.hyper.alpha * (rho * l1 + (1.0 - rho) * 0.5 * l2);
}

namespace {

// Weight vector stored as scale * w so the L2 shrink is O(1) per step.
LinearModel sgd_hinge(const SparseMatrix& x, std::span<const int> y,
                      const SgdHyperparams& h, double intercept_decay) {
  if (x.rows() != y.size()) {
    throw DataError("SVM: " + std::to_string(x.rows()) + " rows but " +
                    std::to_string(y.size()) + " labels");
  }
  if (h.epochs < 1) throw UsageError("SVM: epochs must be >= 1");
  if (!(h.alpha > 0.0)) throw UsageError("SVM: alpha must be > 0");
  if (h.l1_ratio < 0.0 || h.l1_ratio > 1.0) throw UsageError("SVM: l1_ratio must be in [0, 1]");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("SVM: labels must be 0 or 1");
    (v == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw DataError("degenerate training set");

  const std::size_t dim = x.cols;
  std::vector<double> w(dim, 0.0);
  std::vector<double> q(dim, 0.0);
  double wscale = 1.0;
  double intercept = 0.0;
  double u = 0.0;

  const double typw = std::sqrt(1.0 / std::sqrt(h.alpha));
  const double eta0 = typw;  // hinge dloss at -typw is -1, so max(1, .) = 1
  const double t0 = 1.0 / (eta0 * h.alpha);
  const bool use_l1 = h.l1_ratio > 0.0;

  auto reset_scale = [&] {
    for (double& v : w) v *= wscale;
    wscale = 1.0;
  };

  LinearModel model;
  model.hyper = h;
  model.t0 = t0;

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(h.seed);
  double t = 1.0;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r : order) {
      const auto idx = x.row_indices(r);
      const auto val = x.row_values(r);
      const double sign = y[r] == 1 ? 1.0 : -1.0;
      double dot = 0.0;
      for (std::size_t k = 0; k < idx.size(); ++k) dot += w[idx[k]] * val[k];
      const double p = wscale * dot + intercept;
      const double eta = 1.0 / (h.alpha * (t0 + t - 1.0));
      const double dloss = sign * p <= 1.0 ? -sign : 0.0;
      const double update = -eta * dloss;

      wscale *= std::max(0.0, 1.0 - (1.0 - h.l1_ratio) * eta * h.alpha);
      if (wscale < 1e-9) reset_scale();
      if (update != 0.0) {
        for (std::size_t k = 0; k < idx.size(); ++k) w[idx[k]] += update * val[k] / wscale;
        intercept += update * intercept_decay;
      }
      if (use_l1) {
        // Cumulative L1 penalty, applied lazily to the features of this row.
        u += h.l1_ratio * eta * h.alpha;
        for (std::uint32_t j : idx) {
          const double z = w[j];
          if (wscale * w[j] > 0.0) {
            w[j] = std::max(0.0, w[j] - (u + q[j]) / wscale);
          } else if (wscale * w[j] < 0.0) {
            w[j] = std::min(0.0, w[j] + (u - q[j]) / wscale);
          }
          q[j] += wscale * (w[j] - z);
        }
      }
      t += 1.0;
    }
    model.weights.assign(w.begin(), w.end());
    for (double& v : model.weights) v *= wscale;
    model.bias = intercept;
    model.epoch_objective.push_back(regularized_objective(model, x, y));
  }
  if (!std::isfinite(model.bias)) throw NumericError("SVM: non-finite intercept");
  return model;
}

}  // namespace

LinearModel train_linear_svm(const SparseMatrix& x, std::span<const int> y,
                             const SgdHyperparams& h) {
  return sgd_hinge(x, y, h, 0.01);
}

LinearModel train_embedding_svm(const Eigen::MatrixXd& vectors, std::span<const int> y,
                                const SgdHyperparams& h) {
  if (static_cast<std::size_t>(vectors.rows()) != y.size()) {
    throw DataError("embedding SVM: " + std::to_string(vectors.rows()) +
                    " vectors but " + std::to_string(y.size()) + " labels");
  }
  return sgd_hinge(SparseMatrix::from_dense(vectors), y, h, 1.0);
}

}  // namespace offnet
