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

#include "core/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "core/error.hpp"
#include "core/text_util.hpp"

namespace offnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written in native little-endian order");

const StoredTensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw DataError("checkpoint: missing tensor '" + std::string(name) + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["kind"] = ckpt.kind;
  header["meta"] = ckpt.meta;
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  std::string payload;
  for (const auto& t : ckpt.tensors) {
    std::int64_t expected = 1;
    for (auto d : t.shape) expected *= d;
    if (expected != static_cast<std::int64_t>(t.values.size())) {
      throw UsageError("checkpoint: tensor '" + t.name + "' shape does not match data");
    }
    index.push_back({{"name", t.name},
                     {"dtype", t.f64 ? "f64" : "f32"},
                     {"shape", t.shape},
                     {"offset", payload.size()}});
    for (double v : t.values) {
      if (t.f64) {
        char buf[8];
        std::memcpy(buf, &v, 8);
        payload.append(buf, 8);
      } else {
        const float f = static_cast<float>(v);
        char buf[4];
        std::memcpy(buf, &f, 4);
        payload.append(buf, 4);
      }
    }
  }
  header["tensors"] = index;
  std::string out(kCheckpointMagic);
  out += "\n";
  out += header.dump();
  out += "\n";
  out += payload;
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  const std::string magic_line = std::string(kCheckpointMagic) + "\n";
  if (bytes.substr(0, magic_line.size()) != magic_line) {
    throw DataError("not a model checkpoint (bad magic header)");
  }
  const size_t header_start = magic_line.size();
  const size_t header_end = bytes.find('\n', header_start);
  if (header_end == std::string_view::npos) throw DataError("checkpoint: truncated header");
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(bytes.substr(header_start, header_end - header_start));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  const std::string_view payload = bytes.substr(header_end + 1);
  Checkpoint ckpt;
  try {
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.meta = header.at("meta");
    for (const auto& entry : header.at("tensors")) {
      StoredTensor t;
      t.name = entry.at("name").get<std::string>();
      t.f64 = entry.at("dtype").get<std::string>() == "f64";
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const size_t offset = entry.at("offset").get<size_t>();
      std::int64_t count = 1;
      for (auto d : t.shape) count *= d;
      const size_t width = t.f64 ? 8 : 4;
      if (count < 0 || offset + static_cast<size_t>(count) * width > payload.size()) {
        throw DataError("checkpoint: tensor '" + t.name + "' runs past end of file");
      }
      t.values.resize(static_cast<size_t>(count));
      for (size_t i = 0; i < t.values.size(); ++i) {
        const char* p = payload.data() + offset + i * width;
        if (t.f64) {
          std::memcpy(&t.values[i], p, 8);
        } else {
          float f;
          std::memcpy(&f, p, 4);
          t.values[i] = f;
        }
      }
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: corrupt header: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  text::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(text::read_file(path));
}

}  // namespace offnet
