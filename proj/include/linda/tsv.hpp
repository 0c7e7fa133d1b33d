#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace linda {

// Shortest round-trip decimal representation. NaN serializes as "NA".
std::string format_double(double v);

// Strict double parse of a full token; "NA"/"nan" yield NaN.
double parse_double(const std::string& token, const std::string& context);

// Strict non-negative integer parse (no sign, no fraction, no exponent).
long long parse_count(const std::string& token, const std::string& context);

// Reads a delimited table. Rows keep their cell count (no padding);
// trailing '\r' is stripped, fully empty trailing lines are dropped.
std::vector<std::vector<std::string>> read_delimited(std::istream& in, char delim,
                                                     const std::string& source_name);

// Tab unless the path ends in .csv (case-insensitive) or an override is given.
char delimiter_for_path(const std::string& path, std::optional<char> override_delim);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

} // namespace linda
