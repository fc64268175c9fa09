// Copyright 2026 The itft-lab Authors
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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Thin wrappers over ICU's UTF-8 and character-property APIs.
namespace itft::unicode {

// Byte offset of the first ill-formed sequence, or nullopt if `text` is valid UTF-8.
std::optional<std::size_t> find_invalid_utf8(std::string_view text) noexcept;

// Decodes valid UTF-8. Ill-formed sequences decode to U+FFFD.
std::vector<char32_t> decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_whitespace(char32_t cp) noexcept;
// General category P (Pc, Pd, Ps, Pe, Pi, Pf, Po).
bool is_punctuation(char32_t cp) noexcept;
// General category Nd.
bool is_decimal_digit(char32_t cp) noexcept;

bool is_blank(std::string_view text);

std::string to_lower(std::string_view text);

}  // namespace itft::unicode
