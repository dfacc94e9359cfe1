#include "synthdebias/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "synthdebias/errors.hpp"

namespace synthdebias {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

namespace {

double parse_number(const std::string& field, std::size_t line_no, const std::string& col) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw ValidationError("line " + std::to_string(line_no) + ": column " + col +
                          ": not a number: '" + field + "'");
  return value;
}

}  // namespace

Table read_csv(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty (no header row)");
  const auto header = split_csv_line(line);
  if (header.size() != schema.size())
    throw ValidationError("CSV header has " + std::to_string(header.size()) +
                          " columns, schema has " + std::to_string(schema.size()));
  std::vector<std::size_t> target(header.size());
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto j = schema.find(header[i]);
    if (!j) throw ValidationError("CSV column not in schema: " + header[i]);
    if (seen[*j]) throw ValidationError("duplicate CSV column: " + header[i]);
    seen[*j] = true;
    target[i] = *j;
  }

  std::vector<std::vector<double>> columns(schema.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& spec = schema[target[i]];
      const auto& field = fields[i];
      if (field.empty())
        throw ValidationError("line " + std::to_string(line_no) + ": empty cell in column " +
                              spec.name + " (missing values are not supported)");
      double value;
      if (spec.kind.kind() == Kind::kContinuous) {
        value = parse_number(field, line_no, spec.name);
      } else {
        auto level = spec.kind.find_level(field);
        if (!level)
          throw ValidationError("line " + std::to_string(line_no) + ": column " + spec.name +
                                ": unknown level '" + field + "'");
        value = static_cast<double>(*level);
      }
      columns[target[i]].push_back(value);
    }
  }
  return Table(schema, std::move(columns));
}

Table read_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Table& table) {
  const auto& schema = table.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (j) out << ',';
    out << schema[j].name;
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (j) out << ',';
      const double v = table.at(r, j);
      if (schema[j].kind.kind() == Kind::kContinuous)
        out << format_double(v);
      else
        out << schema[j].kind.level_label(static_cast<std::size_t>(v));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, table);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace synthdebias
