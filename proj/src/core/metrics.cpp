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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "json.hpp"

namespace offnet {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred,
                          const std::vector<std::string>& labels) {
  if (gold.size() != pred.size()) {
    throw DataError("confusion: " + std::to_string(gold.size()) +
                    " gold labels vs " + std::to_string(pred.size()) +
                    " predictions");
  }
  const int k = static_cast<int>(labels.size());
  ConfusionMatrix cm;
  cm.labels = labels;
  cm.counts.assign(k, std::vector<std::int64_t>(k, 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= k || pred[i] < 0 || pred[i] >= k) {
      throw DataError("confusion: label index out of range at position " +
                      std::to_string(i));
    }
    ++cm.counts[gold[i]][pred[i]];
  }
  return cm;
}

ConfusionMatrix confusion(const std::vector<std::string>& gold,
                          const std::vector<std::string>& pred,
                          const std::vector<std::string>& labels) {
  auto to_index = [&](const std::string& s) {
    auto it = std::find(labels.begin(), labels.end(), s);
    if (it == labels.end()) {
      throw DataError("label '" + s + "' is not in the class set");
    }
    return static_cast<int>(it - labels.begin());
  };
  std::vector<int> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (const auto& s : gold) g.push_back(to_index(s));
  for (const auto& s : pred) p.push_back(to_index(s));
  return confusion(g, p, labels);
}

MetricsReport report(const ConfusionMatrix& cm) {
  const size_t k = cm.labels.size();
  if (k == 0 || cm.counts.size() != k) throw DataError("report: empty confusion matrix");
  const std::int64_t total = cm.total();
  if (total == 0) throw DataError("report: all-zero confusion matrix");

  MetricsReport r;
  r.confusion = cm;
  std::int64_t trace = 0;
  double f1_sum = 0.0;
  for (size_t c = 0; c < k; ++c) {
    std::int64_t row = 0, col = 0;
    for (size_t j = 0; j < k; ++j) {
      row += cm.counts[c][j];
      col += cm.counts[j][c];
    }
    const std::int64_t tp = cm.counts[c][c];
    trace += tp;
    ClassMetrics m;
    m.label = cm.labels[c];
    m.precision = col ? static_cast<double>(tp) / col : 0.0;
    m.recall = row ? static_cast<double>(tp) / row : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    f1_sum += m.f1;
    r.per_class.push_back(m);
  }
  r.macro_f1 = f1_sum / static_cast<double>(k);
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return r;
}

MetricsReport trivial_baseline(std::span<const int> gold, int constant,
                               const std::vector<std::string>& labels) {
  if (constant < 0 || constant >= static_cast<int>(labels.size())) {
    throw UsageError("trivial_baseline: constant label out of range");
  }
  std::vector<int> pred(gold.size(), constant);
  return report(confusion(gold, pred, labels));
}

double round4(double x) {
  // std::round rounds half away from zero.
  return std::round(x * 1e4) / 1e4;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["macro_f1"] = round4(macro_f1);
  j["accuracy"] = round4(accuracy);
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : per_class) {
    classes.push_back({{"label", c.label},
                       {"precision", round4(c.precision)},
                       {"recall", round4(c.recall)},
                       {"f1", round4(c.f1)}});
  }
  j["per_class"] = classes;
  j["confusion"] = {{"labels", confusion.labels}, {"counts", confusion.counts}};
  return j.dump(2);
}

std::string render_confusion(const ConfusionMatrix& cm) {
  size_t width = 4;
  for (const auto& l : cm.labels) width = std::max(width, l.size());
  for (const auto& row : cm.counts) {
    for (auto c : row) width = std::max(width, std::to_string(c).size());
  }
  auto pad = [&](const std::string& s) {
    return std::string(width - std::min(width, s.size()), ' ') + s;
  };
  std::ostringstream out;
  out << pad("gold") << " |";
  for (const auto& l : cm.labels) out << ' ' << pad(l);
  out << "   (columns: predicted)\n";
  out << std::string(width, '-') << "-+" << std::string((width + 1) * cm.labels.size(), '-')
      << "\n";
  for (size_t g = 0; g < cm.labels.size(); ++g) {
    out << pad(cm.labels[g]) << " |";
    for (auto c : cm.counts[g]) out << ' ' << pad(std::to_string(c));
    out << "\n";
  }
  return out.str();
}

}  // namespace offnet
