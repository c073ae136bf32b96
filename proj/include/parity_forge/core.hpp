#pragma once

// Typed tabular data: column schema, immutable datasets, CSV ingestion and
// export.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parity_forge {

enum class Scale { continuous, count, binary, categorical };
enum class Role { feature, protected_attr, response, excluded };

// Invertible transform applied to a continuous column at load time and
// inverted on export.
enum class PreTransform { none, log };

std::string_view to_string(Scale s);
std::string_view to_string(Role r);
std::string_view to_string(PreTransform t);
Scale parse_scale(std::string_view s);
Role parse_role(std::string_view s);
PreTransform parse_pre_transform(std::string_view s);

double apply_pre_transform(PreTransform t, double raw);
double invert_pre_transform(PreTransform t, double internal);

struct ColumnSpec {
  std::string name;
  Scale scale = Scale::continuous;
  Role role = Role::feature;
  PreTransform transform = PreTransform::none;

  bool operator==(const ColumnSpec&) const = default;
};

// One column of a dataset. Numeric scales store their (pre-transformed)
// value; categorical columns store the index of the level in `levels`, which
// is sorted by name and frozen at load.
class Column {
 public:
  // `raw_pairs` maps internal values back to file-scale values for
  // pre-transformed columns.
  Column(ColumnSpec spec, std::vector<double> values,
         std::vector<std::string> levels = {},
         std::vector<std::pair<double, double>> raw_pairs = {});

  // Copy of this column's internal->raw lookup, for derived columns.
  std::vector<std::pair<double, double>> raw_pairs() const { return raw_lookup_; }

  const ColumnSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return values_.size(); }

  // Value on the original (file) scale.
  double raw(std::size_t row) const;
  // Maps an internal value back to the file scale. Exact for any value that
  // was observed at load.
  double to_raw(double internal) const;

  // Text for one cell as written to CSV.
  std::string format(std::size_t row) const;
  std::string format_value(double internal) const;

 private:
  ColumnSpec spec_;
  std::vector<double> values_;
  std::vector<std::string> levels_;
  std::vector<std::pair<double, double>> raw_lookup_;  // internal -> raw
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Column> columns);

  std::size_t rows() const noexcept { return n_; }
  std::size_t num_columns() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  const Column& column(std::string_view name) const;
  const Column* find(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  std::vector<const Column*> with_role(Role role) const;
  const Column& response() const;

  // New dataset with `name` replaced by `values` (same spec and levels).
  Dataset with_values(std::string_view name, std::vector<double> values) const;
  // New dataset restricted to the named columns, in the given order.
  Dataset select(const std::vector<std::string>& names) const;
  // New dataset restricted to the given row indices.
  Dataset take_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<Column> columns_;
  std::size_t n_ = 0;
};

// Reads a header-first CSV. Columns not named in the schema are ignored; the
// returned dataset has the schema's column order.
Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema);
Dataset parse_csv(std::string_view text, const std::vector<ColumnSpec>& schema);

std::string to_csv(const Dataset& ds);
void write_csv(const std::string& path, const Dataset& ds);

// Confirms exactly one response column and, when `require_protected`, at
// least one protected column.
void validate_roles(const Dataset& ds, bool require_protected = true);

// Splits one CSV record stream into rows of fields (RFC 4180 quoting).
std::vector<std::vector<std::string>> read_csv_records(std::string_view text);
std::string quote_csv_field(std::string_view field);

// Shortest round-trip decimal text; NaN prints as NA.
std::string format_number(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace parity_forge
