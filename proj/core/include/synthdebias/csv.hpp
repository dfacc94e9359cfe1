#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "synthdebias/table.hpp"

namespace synthdebias {

// CSV with a header row. Columns may appear in any order but must match the
// schema's names exactly. Discrete columns are written as level labels
// (binary as 0/1); continuous values use 17 significant digits so that a
// write/read round trip is bit-exact.
Table read_csv(std::istream& in, const Schema& schema);
Table read_csv(const std::filesystem::path& path, const Schema& schema);

void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

// Shortest representation with at most 17 significant digits.
std::string format_double(double value);

// Minimal CSV line splitter (no quoting); used for numeric summary files too.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace synthdebias
