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
#include <vector>

namespace offnet {

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> counts;  // [gold][predicted]

  std::int64_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred,
                          const std::vector<std::string>& labels);

// String labels must come from `labels`; anything else is a DataError.
ConfusionMatrix confusion(const std::vector<std::string>& gold,
                          const std::vector<std::string>& pred,
                          const std::vector<std::string>& labels);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;

  // Values rounded half away from zero to four decimals.
  std::string to_json() const;
};

// Undefined precision or recall (zero denominator) is reported as 0.
MetricsReport report(const ConfusionMatrix& cm);

// Report for predicting `constant` on every example.
MetricsReport trivial_baseline(std::span<const int> gold, int constant,
                               const std::vector<std::string>& labels);

double round4(double x);

std::string render_confusion(const ConfusionMatrix& cm);

}  // namespace offnet
