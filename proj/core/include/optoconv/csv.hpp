#pragma once

#include <string>
#include <vector>

#include "optoconv/matrix.hpp"

namespace optoconv {

// Shortest decimal form that round-trips through a double. Locale independent.
std::string fmt_double(double x);
std::string fmt_int(long long x);

// Strict whole-string parses; format error on trailing junk or empty input.
double parse_double(const std::string& s);
long long parse_int(const std::string& s);

// Splits one CSV line on ','. No quoting; none of our formats needs it.
std::vector<std::string> split_csv_line(const std::string& line);

// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string> split_lines(const std::string& text);

// One CSV row per matrix row, no header.
std::string matrix_to_csv(const Matrix& m);

std::string read_text_file(const std::string& path);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace optoconv
