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

namespace offnet::text {

// Decodes UTF-8 into code points. Malformed sequences decode to U+FFFD one
// byte at a time, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view s);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// ASCII-only case folding; bytes >= 0x80 pass through untouched.
std::string ascii_lower(std::string_view s);

bool is_space(char c);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

// Backslash escaping for single-line TSV fields: \t \n \r and \\ .
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace offnet::text
