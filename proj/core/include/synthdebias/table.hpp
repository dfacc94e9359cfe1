#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace synthdebias {

enum class Kind { kContinuous, kBinary, kOrdinal, kCategorical };

const char* kind_name(Kind kind);

// Column type. Ordinal and categorical columns carry their level labels; the
// ordinal order is informational only, estimators use levels as strata.
class ColumnKind {
 public:
  static ColumnKind continuous() { return ColumnKind(Kind::kContinuous, {}); }
  static ColumnKind binary() { return ColumnKind(Kind::kBinary, {}); }
  static ColumnKind ordinal(std::vector<std::string> levels);
  static ColumnKind categorical(std::vector<std::string> levels);

  Kind kind() const noexcept { return kind_; }
  bool is_discrete() const noexcept { return kind_ != Kind::kContinuous; }
  bool is_numeric() const noexcept {
    return kind_ == Kind::kContinuous || kind_ == Kind::kBinary;
  }
  // Binary columns have the two levels "0" and "1".
  std::size_t level_count() const noexcept;
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  std::string level_label(std::size_t level) const;
  std::optional<std::size_t> find_level(const std::string& label) const;

  bool operator==(const ColumnKind&) const = default;

 private:
  ColumnKind(Kind kind, std::vector<std::string> levels);

  Kind kind_;
  std::vector<std::string> levels_;
};

struct ColumnSpec {
  std::string name;
  ColumnKind kind;

  bool operator==(const ColumnSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns);

  std::size_t size() const noexcept { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns_[i]; }
  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }

  std::optional<std::size_t> find(const std::string& name) const;
  // Throws ValidationError for an unknown name.
  std::size_t index_of(const std::string& name) const;
  const ColumnSpec& column(const std::string& name) const {
    return columns_[index_of(name)];
  }

  // Copy with one column's kind replaced.
  Schema with_kind(const std::string& name, ColumnKind kind) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
};

// Immutable column-major table. Discrete entries are level indices stored as
// doubles; binary entries are exactly 0 or 1. No missing values.
class Table {
 public:
  Table() = default;
  // Validates shape, level indices and finiteness.
  Table(Schema schema, std::vector<std::vector<double>> columns);
  static Table empty(Schema schema);

  const Schema& schema() const noexcept { return schema_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }

  std::span<const double> column(std::size_t i) const { return columns_[i]; }
  std::span<const double> column(const std::string& name) const {
    return columns_[schema_.index_of(name)];
  }
  double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  Table select_rows(std::span<const std::size_t> rows) const;
  // Copy with one column's values and kind replaced.
  Table with_column(const std::string& name, ColumnKind kind,
                    std::vector<double> values) const;
  // Rows of a then rows of b; schemas must be equal.
  static Table concat(const Table& a, const Table& b);

  std::vector<std::vector<double>> release_columns() && { return std::move(columns_); }

  bool operator==(const Table&) const = default;

 private:
  Schema schema_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
};

// One equality condition on a discrete column.
struct Condition {
  std::string column;
  std::size_t level;
};
using Assignment = std::vector<Condition>;

std::string describe(const Schema& schema, const Assignment& assignment);
// Resolves an assignment to column indices; throws ValidationError if a column
// is unknown, continuous, or the level is out of range.
std::vector<std::pair<std::size_t, double>> resolve(const Schema& schema,
                                                    const Assignment& assignment);

double column_mean(const Table& table, const std::string& column);

// Partition rows by the level of a discrete column. Every declared level gets
// an entry, possibly empty.
std::map<std::size_t, Table> split_by(const Table& table, const std::string& column);

// Rows satisfying every condition, in original order.
Table filter_rows(const Table& table, const Assignment& assignment);

}  // namespace synthdebias
