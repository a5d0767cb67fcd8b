/// Small helpers shared by the tab-separated file readers and writers.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "locec/errors.hpp"

namespace locec::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);

/// Comma-joined shortest-form doubles.
std::string join_doubles(const std::vector<double>& values);

std::vector<std::string_view> split(std::string_view s, char sep);
/// Splits on runs of spaces and tabs.
std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Calls fn(line, line_number) for every line of the file, line numbers from
/// 1. Throws DataError if the file cannot be opened.
void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Opens a file for writing; throws DataError on failure.
std::ofstream open_output(const std::string& path);

/// Reads a whole file into a string.
std::string read_file(const std::string& path);

}  // namespace locec::text
