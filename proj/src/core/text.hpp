// Copyright 2026 The opufid Authors.
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

// Small helpers shared by the line-oriented artifact formats: bit vectors,
// hex packing, `key=value` documents and fixed-precision number printing.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace opufid {

/// One byte per bit, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Packs bits MSB-first into hex digits; the last digit is zero-padded.
std::string bits_to_hex(std::span<const std::uint8_t> bits);

/// Inverse of bits_to_hex for a known bit count. Padding bits must be zero.
Bits hex_to_bits(std::string_view hex, std::size_t n_bits);

/// Shortest text that reads back to the identical double.
std::string format_exact(double value);

/// Fixed nine-significant-digit rendering used for every CSV column.
std::string format_fixed(double value);

double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// A versioned `key=value` document: first line is the header, the rest are
/// pairs. Blank lines and lines starting with '#' are ignored on read.
struct KeyValueDoc {
  std::string header;
  std::vector<std::pair<std::string, std::string>> entries;

  void set(std::string key, std::string value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;
  std::map<std::string, std::string> as_map() const;

  void write(std::ostream& out) const;
  static KeyValueDoc read(std::istream& in);
};

void write_file_atomically(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace opufid
