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

#include <fmt/format.h>

#include "itft/error.hpp"
#include "itft/hash.hpp"

namespace itft {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::encoding: return "encoding";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::experiment: return "experiment";
  }
  return "unknown";
}

std::string Fnv1a::hex() const { return fmt::format("{:016x}", state_); }

std::string content_hash(std::string_view bytes) { return Fnv1a{}.update(bytes).hex(); }

}  // namespace itft
