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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace offnet {

// Single-file model container:
//   line 1: OFFMDL1
//   line 2: JSON header {kind, meta, tensors: [{name, dtype, shape, offset}]}
//   rest:   little-endian tensor payload, f32 or f64 per tensor
inline constexpr std::string_view kCheckpointMagic = "OFFMDL1";

struct StoredTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  bool f64 = false;
  std::vector<double> values;
};

struct Checkpoint {
  std::string kind;  // deep | svm | embedding-svm
  nlohmann::ordered_json meta;
  std::vector<StoredTensor> tensors;

  const StoredTensor& tensor(std::string_view name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace offnet
