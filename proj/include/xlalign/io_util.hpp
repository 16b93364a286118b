#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "xlalign/errors.hpp"
#include "xlalign/numeric.hpp"

namespace xlalign {

// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline void append_vector(std::string& out, const Vec& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(' ');
    out += format_double(v[i]);
  }
}

inline bool parse_double(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_i64(std::string_view s, std::int64_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Whitespace-run split (spaces and tabs), skipping empty fields.
inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

// Parses "v1 v2 ... vd" with single-space separation into out; returns
// false on any parse failure or wrong count.
inline bool parse_vector(std::string_view s, std::size_t dim, Vec& out) {
  out.clear();
  out.reserve(dim);
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(' ', start);
    std::string_view field =
        pos == std::string_view::npos ? s.substr(start) : s.substr(start, pos - start);
    double v;
    if (!parse_double(field, v)) return false;
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out.size() == dim;
}

// Writes through a temp file and renames on success, so failed runs never
// leave partial artifacts behind.
inline void atomic_write_file(const std::string& path,
                              const std::function<void(std::ostream&)>& fill) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    fill(out);
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path);
}

inline std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string(what) + ": cannot open " + path);
  return in;
}

}  // namespace xlalign
