// Copyright 2026 The MGAug Authors
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

// Flat `key = value` text: one pair per line, `#` starts a comment.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mgaug::kv {

using Pairs = std::vector<std::pair<std::string, std::string>>;

/// Throws ConfigError on lines without '=' or with an empty key.
Pairs parse(std::istream& in);

/// Splits `key=value` as given on a command line.
std::pair<std::string, std::string> split_assignment(const std::string& s);

std::vector<std::string> split_list(const std::string& s);

double to_double(const std::string& key, const std::string& v);
std::uint64_t to_u64(const std::string& key, const std::string& v);
long long to_int(const std::string& key, const std::string& v);
bool to_bool(const std::string& key, const std::string& v);

/// Shortest text that round-trips a double ("%.17g", trimmed).
std::string format_double(double v);

}  // namespace mgaug::kv
