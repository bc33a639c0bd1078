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
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace offnet {

// Compressed sparse rows with sorted column indices per row.
struct SparseMatrix {
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t rows() const { return row_ptr.size() - 1; }
  void add_row(std::vector<std::pair<std::uint32_t, double>> entries);
  std::span<const std::uint32_t> row_indices(std::size_t r) const {
    return {indices.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }

  // Every entry of `dense`, zeros included.
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense);
};

struct NgramRanges {
  int word_min = 1;
  int word_max = 3;
  int char_min = 1;
  int char_max = 5;
  bool operator==(const NgramRanges&) const = default;
};

// Word n-gram TF-IDF block followed by a character n-gram count block.
// Word n-grams come from the tweet tokenizer (lowercased); character n-grams
// from the lowercased text with whitespace runs collapsed to one space.
// Vocabularies are sorted, so column order does not depend on corpus order.
class NgramFeaturizer {
 public:
  static NgramFeaturizer fit(const std::vector<std::string>& texts,
                             const NgramRanges& ranges = {});
  static NgramFeaturizer from_parts(std::vector<std::string> word_vocab,
                                    std::vector<double> idf,
                                    std::vector<std::string> char_vocab,
                                    const NgramRanges& ranges);

  SparseMatrix transform(const std::vector<std::string>& texts) const;

  std::vector<std::string> word_ngrams(const std::string& text) const;
  std::vector<std::string> char_ngrams(const std::string& text) const;

  std::size_t word_dim() const { return word_vocab_.size(); }
  std::size_t char_dim() const { return char_vocab_.size(); }
  std::size_t dim() const { return word_dim() + char_dim(); }
  const std::vector<std::string>& word_vocab() const { return word_vocab_; }
  const std::vector<std::string>& char_vocab() const { return char_vocab_; }
  const std::vector<double>& idf() const { return idf_; }
  const NgramRanges& ranges() const { return ranges_; }

 private:
  void index();

  NgramRanges ranges_;
  std::vector<std::string> word_vocab_;
  std::vector<double> idf_;
  std::vector<std::string> char_vocab_;
  std::unordered_map<std::string, std::uint32_t> word_index_;
  std::unordered_map<std::string, std::uint32_t> char_index_;
};

struct SgdHyperparams {
  int epochs = 15;
  double alpha = 1e-6;
  double l1_ratio = 0.15;
  std::uint64_t seed = 5;
  bool operator==(const SgdHyperparams&) const = default;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  SgdHyperparams hyper;
  double t0 = 0.0;  // step schedule offset: eta_t = 1 / (alpha * (t0 + t))
  std::vector<double> epoch_objective;

  double decision(std::span<const std::uint32_t> idx, std::span<const double> val) const;
  double decision(const SparseMatrix& x, std::size_t row) const;
  int predict(const SparseMatrix& x, std::size_t row) const;
  std::vector<int> predict(const SparseMatrix& x) const;
};

// Mean hinge loss plus alpha * (l1_ratio * |w|_1 + (1 - l1_ratio) / 2 * |w|^2).
double regularized_objective(const LinearModel& model, const SparseMatrix& x,
                             std::span<const int> y);

// Linear SVM by stochastic subgradient descent: hinge loss, elastic-net
// penalty, optimal step schedule, seeded shuffling each epoch. Labels are
// class indices {0, 1}. Throws DataError("degenerate training set") when
// only one class is present.
LinearModel train_linear_svm(const SparseMatrix& x, std::span<const int> y,
                             const SgdHyperparams& h);

// Same trainer over dense sentence vectors.
LinearModel train_embedding_svm(const Eigen::MatrixXd& vectors, std::span<const int> y,
                                const SgdHyperparams& h);

}  // namespace offnet
