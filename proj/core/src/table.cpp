#include "synthdebias/table.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "synthdebias/errors.hpp"

namespace synthdebias {

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::kContinuous: return "continuous";
    case Kind::kBinary: return "binary";
    case Kind::kOrdinal: return "ordinal";
    case Kind::kCategorical: return "categorical";
  }
  return "unknown";
}

ColumnKind::ColumnKind(Kind kind, std::vector<std::string> levels)
    : kind_(kind), levels_(std::move(levels)) {
  if (kind_ == Kind::kOrdinal || kind_ == Kind::kCategorical) {
    if (levels_.empty()) throw ValidationError("level list must be non-empty");
    std::set<std::string> seen;
    for (const auto& level : levels_) {
      if (level.empty()) throw ValidationError("level labels must be non-empty");
      if (level.find_first_of(",\"\n\r") != std::string::npos)
        throw ValidationError("level label contains a reserved character: " + level);
      if (!seen.insert(level).second)
        throw ValidationError("duplicate level label: " + level);
    }
  }
}

ColumnKind ColumnKind::ordinal(std::vector<std::string> levels) {
  return ColumnKind(Kind::kOrdinal, std::move(levels));
}

ColumnKind ColumnKind::categorical(std::vector<std::string> levels) {
  return ColumnKind(Kind::kCategorical, std::move(levels));
}

std::size_t ColumnKind::level_count() const noexcept {
  switch (kind_) {
    case Kind::kContinuous: return 0;
    case Kind::kBinary: return 2;
    default: return levels_.size();
  }
}

std::string ColumnKind::level_label(std::size_t level) const {
  if (kind_ == Kind::kBinary) return level == 0 ? "0" : "1";
  return levels_.at(level);
}

std::optional<std::size_t> ColumnKind::find_level(const std::string& label) const {
  if (kind_ == Kind::kBinary) {
    if (label == "0") return 0;
    if (label == "1") return 1;
    return std::nullopt;
  }
  auto it = std::find(levels_.begin(), levels_.end(), label);
  if (it == levels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - levels_.begin());
}

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw ValidationError("column names must be non-empty");
    if (c.name.find_first_of(",\"\n\r") != std::string::npos)
      throw ValidationError("column name contains a reserved character: " + c.name);
    if (!seen.insert(c.name).second)
      throw ValidationError("duplicate column name: " + c.name);
  }
}

std::optional<std::size_t> Schema::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::index_of(const std::string& name) const {
  if (auto i = find(name)) return *i;
  throw ValidationError("unknown column: " + name);
}

Schema Schema::with_kind(const std::string& name, ColumnKind kind) const {
  auto columns = columns_;
  columns[index_of(name)].kind = std::move(kind);
  return Schema(std::move(columns));
}

namespace {

void validate_column(const ColumnSpec& spec, std::span<const double> values) {
  const auto& kind = spec.kind;
  for (double v : values) {
    if (!std::isfinite(v))
      throw ValidationError("non-finite value in column " + spec.name);
    if (kind.is_discrete()) {
      if (v < 0.0 || v != std::floor(v) ||
          v >= static_cast<double>(kind.level_count()))
        throw ValidationError("invalid level index in column " + spec.name);
    }
  }
}

}  // namespace

Table::Table(Schema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size())
    throw ValidationError("column count does not match schema");
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != rows_)
      throw ValidationError("ragged column: " + schema_[j].name);
    validate_column(schema_[j], columns_[j]);
  }
}

Table Table::empty(Schema schema) {
  std::vector<std::vector<double>> columns(schema.size());
  return Table(std::move(schema), std::move(columns));
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    out[j].reserve(rows.size());
    for (std::size_t r : rows) out[j].push_back(columns_[j].at(r));
  }
  Table t;
  t.schema_ = schema_;
  t.columns_ = std::move(out);
  t.rows_ = rows.size();
  return t;
}

Table Table::with_column(const std::string& name, ColumnKind kind,
                         std::vector<double> values) const {
  auto columns = columns_;
  const std::size_t j = schema_.index_of(name);
  columns[j] = std::move(values);
  return Table(schema_.with_kind(name, std::move(kind)), std::move(columns));
}

Table Table::concat(const Table& a, const Table& b) {
  if (!(a.schema_ == b.schema_)) throw ValidationError("concat: schema mismatch");
  Table t;
  t.schema_ = a.schema_;
  t.columns_ = a.columns_;
  for (std::size_t j = 0; j < t.columns_.size(); ++j)
    t.columns_[j].insert(t.columns_[j].end(), b.columns_[j].begin(), b.columns_[j].end());
  t.rows_ = a.rows_ + b.rows_;
  return t;
}

std::string describe(const Schema& schema, const Assignment& assignment) {
  std::ostringstream out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (i) out << ",";
    const auto& c = assignment[i];
    out << c.column << "=";
    if (auto j = schema.find(c.column); j && c.level < schema[*j].kind.level_count())
      out << schema[*j].kind.level_label(c.level);
    else
      out << "#" << c.level;
  }
  return out.str();
}

std::vector<std::pair<std::size_t, double>> resolve(const Schema& schema,
                                                    const Assignment& assignment) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(assignment.size());
  for (const auto& c : assignment) {
    const std::size_t j = schema.index_of(c.column);
    const auto& kind = schema[j].kind;
    if (!kind.is_discrete())
      throw ValidationError("cannot condition on continuous column " + c.column);
    if (c.level >= kind.level_count())
      throw ValidationError("level out of range for column " + c.column);
    out.emplace_back(j, static_cast<double>(c.level));
  }
  return out;
}

double column_mean(const Table& table, const std::string& column) {
  const auto& spec = table.schema().column(column);
  if (!spec.kind.is_numeric())
    throw ValidationError("column_mean on non-numeric column " + column);
  if (table.rows() == 0) throw ValidationError("column_mean on empty table");
  double sum = 0.0;
  for (double v : table.column(column)) sum += v;
  return sum / static_cast<double>(table.rows());
}

std::map<std::size_t, Table> split_by(const Table& table, const std::string& column) {
  const std::size_t j = table.schema().index_of(column);
  const auto& kind = table.schema()[j].kind;
  if (!kind.is_discrete())
    throw ValidationError("split_by on continuous column " + column);
  std::vector<std::vector<std::size_t>> rows(kind.level_count());
  const auto values = table.column(j);
  for (std::size_t r = 0; r < values.size(); ++r)
    rows[static_cast<std::size_t>(values[r])].push_back(r);
  std::map<std::size_t, Table> parts;
  for (std::size_t level = 0; level < rows.size(); ++level)
    parts.emplace(level, table.select_rows(rows[level]));
  return parts;
}

Table filter_rows(const Table& table, const Assignment& assignment) {
  const auto conditions = resolve(table.schema(), assignment);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    bool ok = true;
    for (const auto& [j, level] : conditions) {
      if (table.at(r, j) != level) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(r);
  }
  return table.select_rows(keep);
}

}  // namespace synthdebias
