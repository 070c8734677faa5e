#include "vessel4d/textio.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "vessel4d/error.hpp"

namespace vessel4d::textio {

void append_double(std::string& out, double value) {
  std::array<char, 32> buf{};
  if (value == 0.0) value = 0.0;  // normalize -0
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  out.append(buf.data(), ptr);
}

std::string format_double(double value) {
  std::string out;
  append_double(out, value);
  return out;
}

bool parse_double(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_int64(std::string_view text, long long& value) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto field : split(text, ',')) {
    double v = 0.0;
    if (!parse_double(field, v)) throw ConfigError("not a number list: '" + std::string(text) + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace vessel4d::textio
