#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace privscore {

// Raised for malformed user input (files, flags, schemas). The CLI maps this
// to exit code 2; everything else maps to 1.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

enum class ColumnKind { binary, numeric };
enum class ColumnRole { pa, confounder, feature, target, ignore };

std::string to_string(ColumnKind k);
std::string to_string(ColumnRole r);
ColumnKind column_kind_from_string(const std::string& s);
ColumnRole column_role_from_string(const std::string& s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::feature;
};

// Tabular data, column-major doubles. Binary columns are stored as 0/1
// numerics so that warped fractional values (e.g. 0.24) can inhabit the same
// column. Immutable in all pipeline uses after construction.
class DatasetTable {
 public:
  DatasetTable() = default;
  DatasetTable(std::vector<ColumnSpec> columns, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return specs_.size(); }
  const std::vector<ColumnSpec>& columns() const { return specs_; }
  const ColumnSpec& column(std::size_t c) const { return specs_[c]; }

  // -1 when absent.
  int column_index(const std::string& name) const;
  // Throws InputError naming the column when absent.
  int require_column(const std::string& name) const;

  double at(std::size_t row, std::size_t col) const { return data_[col][row]; }
  void set(std::size_t row, std::size_t col, double v) { data_[col][row] = v; }
  const std::vector<double>& col(std::size_t c) const { return data_[c]; }
  std::vector<double>& mutable_col(std::size_t c) { return data_[c]; }

  std::vector<double> row(std::size_t r) const;
  void set_row(std::size_t r, std::span<const double> values);

  int pa_column() const;      // -1 when no pa-role column
  int target_column() const;  // -1 when no target-role column

  // Columns a predictive model consumes: pa + confounders + features, in
  // column order.
  std::vector<int> model_feature_columns() const;

  DatasetTable select_rows(const std::vector<int>& indices) const;

  // Ingestion-time invariants: n >= 1, exactly one pa and one target column,
  // binary columns contain only {0,1}. (Warped tables legitimately violate
  // the binary constraint and never pass through this check.)
  void check_ingestion_invariants() const;

  double advantaged_level = 1.0;

 private:
  std::vector<ColumnSpec> specs_;
  std::vector<std::vector<double>> data_;
  std::size_t n_rows_ = 0;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
  std::uint64_t seed = 0;
};

// CSV ingestion (RFC-4180: quoted fields, escaped quotes, CRLF). The header
// must contain exactly the spec'd column names (any order); the resulting
// table uses the spec order.
DatasetTable load_csv(const std::string& path, const std::vector<ColumnSpec>& specs);

void write_csv(const DatasetTable& table, const std::string& path);

// Column spec file: JSON object mapping column name -> {"kind": .., "role": ..},
// declaration order preserved.
std::vector<ColumnSpec> load_column_specs(const std::string& path);

enum class Recipe { hmda, lawschool };
Recipe recipe_from_string(const std::string& s);

// Encoding recipes over numeric tables. Tables already carrying the encoded
// schema pass through unchanged (idempotence).
DatasetTable apply_recipe(const DatasetTable& raw, Recipe recipe);

// Recipe-aware CSV ingestion: decodes the raw text cells of the public data
// files (race labels, dti bands, age bands, sex codes) into the numeric
// source columns apply_recipe expects. Rows with unmappable or missing cells
// are dropped; the count lands in *rejected_rows and on stderr.
DatasetTable load_recipe_csv(const std::string& path, Recipe recipe,
                             std::size_t* rejected_rows = nullptr);

// Deterministic uniform train/test partition; |train| = round(fraction * n)
// clamped to [1, n-1].
SplitIndices split(const DatasetTable& table, double fraction, std::uint64_t seed);

}  // namespace privscore
