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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace offnet {

// Flat `key = value` settings. Every key has a default; unknown keys are a
// UsageError. Later calls to set() and load_file() override earlier values,
// which gives CLI > file > defaults when applied in that order.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  void parse(std::string_view contents);
  void load_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  std::string str(const std::string& key) const { return get(key); }
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  bool has_value(const std::string& key) const { return !get(key).empty(); }

  // Output path `name` inside out_dir.
  std::string output_path(const std::string& name) const;
  std::string prepared_dir() const;

  // Sorted `key = value` lines covering every key.
  std::string echo() const;

  static const std::vector<std::pair<std::string, std::string>>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace offnet
