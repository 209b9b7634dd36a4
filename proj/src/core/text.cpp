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

#include "core/text.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace opufid {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kDegenerateSegment: return "degenerate-segment";
    case ErrorCode::kEmptyOverlap: return "empty-overlap";
    case ErrorCode::kInsufficientEntropy: return "insufficient-entropy";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kStorage: return "storage";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kAcquisition: return "acquisition";
  }
  return "unknown";
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string hex;
  hex.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < bits.size()) nibble |= bits[i + j] & 1u;
    }
    hex.push_back(kDigits[nibble]);
  }
  return hex;
}

Bits hex_to_bits(std::string_view hex, std::size_t n_bits) {
  if (hex.size() != (n_bits + 3) / 4) {
    fail(ErrorCode::kParse, "hex length " + std::to_string(hex.size()) +
                                " does not match " + std::to_string(n_bits) +
                                " bits");
  }
  Bits bits(n_bits);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[d];
    unsigned nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      nibble = static_cast<unsigned>(c - 'A' + 10);
    } else {
      fail(ErrorCode::kParse, std::string("bad hex digit '") + c + "'");
    }
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t i = d * 4 + j;
      const std::uint8_t bit = (nibble >> (3 - j)) & 1u;
      if (i < n_bits) {
        bits[i] = bit;
      } else if (bit != 0) {
        fail(ErrorCode::kParse, "nonzero hex padding");
      }
    }
  }
  return bits;
}

std::string format_exact(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) fail(ErrorCode::kInvalidParameter, "unprintable number");
  return std::string(buf, end);
}

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorCode::kParse, "bad number for " + std::string(what) + ": '" +
                                std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorCode::kParse, "bad integer for " + std::string(what) + ": '" +
                                std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

void KeyValueDoc::set(std::string key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

const std::string& KeyValueDoc::get(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  fail(ErrorCode::kParse, "missing key '" + key + "' in " + header);
}

bool KeyValueDoc::has(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return true;
  }
  return false;
}

std::map<std::string, std::string> KeyValueDoc::as_map() const {
  return {entries.begin(), entries.end()};
}

void KeyValueDoc::write(std::ostream& out) const {
  out << header << '\n';
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

KeyValueDoc KeyValueDoc::read(std::istream& in) {
  KeyValueDoc doc;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParse, "line 1: empty document");
  doc.header = std::string(trim(line));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    doc.entries.emplace_back(std::string(trim(body.substr(0, eq))),
                             std::string(trim(body.substr(eq + 1))));
  }
  return doc;
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kStorage, "cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) fail(ErrorCode::kStorage, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::kStorage, "cannot replace " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kStorage, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace opufid
