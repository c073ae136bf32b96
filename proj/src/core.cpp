#include "parity_forge/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "parity_forge/error.hpp"

namespace parity_forge {

std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::continuous: return "continuous";
    case Scale::count: return "count";
    case Scale::binary: return "binary";
    case Scale::categorical: return "categorical";
  }
  return "?";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::feature: return "feature";
    case Role::protected_attr: return "protected";
    case Role::response: return "response";
    case Role::excluded: return "excluded";
  }
  return "?";
}

std::string_view to_string(PreTransform t) {
  return t == PreTransform::log ? "log" : "none";
}

Scale parse_scale(std::string_view s) {
  if (s == "continuous") return Scale::continuous;
  if (s == "count") return Scale::count;
  if (s == "binary") return Scale::binary;
  if (s == "categorical") return Scale::categorical;
  throw Error(ErrorKind::config, "unknown scale '" + std::string(s) + "'");
}

Role parse_role(std::string_view s) {
  if (s == "feature") return Role::feature;
  if (s == "protected") return Role::protected_attr;
  if (s == "response") return Role::response;
  if (s == "excluded") return Role::excluded;
  throw Error(ErrorKind::config, "unknown role '" + std::string(s) + "'");
}

PreTransform parse_pre_transform(std::string_view s) {
  if (s == "none" || s.empty()) return PreTransform::none;
  if (s == "log") return PreTransform::log;
  throw Error(ErrorKind::config, "unknown transform '" + std::string(s) + "'");
}

double apply_pre_transform(PreTransform t, double raw) {
  return t == PreTransform::log ? std::log(raw) : raw;
}

double invert_pre_transform(PreTransform t, double internal) {
  return t == PreTransform::log ? std::exp(internal) : internal;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace {

std::string format_double(double v) { return format_number(v); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

Column::Column(ColumnSpec spec, std::vector<double> values,
               std::vector<std::string> levels,
               std::vector<std::pair<double, double>> raw_pairs)
    : spec_(std::move(spec)),
      values_(std::move(values)),
      levels_(std::move(levels)),
      raw_lookup_(std::move(raw_pairs)) {
  std::sort(raw_lookup_.begin(), raw_lookup_.end());
  raw_lookup_.erase(std::unique(raw_lookup_.begin(), raw_lookup_.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    raw_lookup_.end());
}

double Column::raw(std::size_t row) const { return to_raw(values_.at(row)); }

double Column::to_raw(double internal) const {
  if (spec_.transform == PreTransform::none) return internal;
  auto it = std::lower_bound(
      raw_lookup_.begin(), raw_lookup_.end(), internal,
      [](const auto& p, double v) { return p.first < v; });
  if (it != raw_lookup_.end() && it->first == internal) return it->second;
  return invert_pre_transform(spec_.transform, internal);
}

std::string Column::format_value(double internal) const {
  switch (spec_.scale) {
    case Scale::categorical: {
      auto idx = static_cast<std::size_t>(internal);
      return quote_csv_field(levels_.at(idx));
    }
    case Scale::count:
    case Scale::binary:
      return format_double(std::round(internal));
    case Scale::continuous:
      return format_double(to_raw(internal));
  }
  return {};
}

std::string Column::format(std::size_t row) const {
  return format_value(values_.at(row));
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) return;
  n_ = columns_.front().size();
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.size() != n_) {
      throw Error(ErrorKind::validation,
                  "column '" + c.name() + "' has " + std::to_string(c.size()) +
                      " rows, expected " + std::to_string(n_));
    }
    if (!seen.insert(c.name()).second) {
      throw Error(ErrorKind::schema, "duplicate column '" + c.name() + "'");
    }
  }
}

const Column* Dataset::find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name() == name) return &c;
  }
  return nullptr;
}

const Column& Dataset::column(std::string_view name) const {
  const Column* c = find(name);
  if (c == nullptr) {
    throw Error(ErrorKind::schema, "no column named '" + std::string(name) + "'");
  }
  return *c;
}

std::optional<std::size_t> Dataset::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

std::vector<const Column*> Dataset::with_role(Role role) const {
  std::vector<const Column*> out;
  for (const auto& c : columns_) {
    if (c.spec().role == role) out.push_back(&c);
  }
  return out;
}

const Column& Dataset::response() const {
  auto r = with_role(Role::response);
  if (r.size() != 1) {
    throw Error(ErrorKind::role, "expected exactly one response column, found " +
                                     std::to_string(r.size()));
  }
  return *r.front();
}

Dataset Dataset::with_values(std::string_view name, std::vector<double> values) const {
  std::vector<Column> cols = columns_;
  auto idx = index_of(name);
  if (!idx) throw Error(ErrorKind::schema, "no column named '" + std::string(name) + "'");
  // The replacement keeps the raw lookup of the original so that values drawn
  // from the observed support export exactly.
  const Column& orig = columns_[*idx];
  cols[*idx] = Column(orig.spec(), std::move(values), orig.levels(), orig.raw_pairs());
  return Dataset(std::move(cols));
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
  std::vector<Column> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(column(n));
  return Dataset(std::move(cols));
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (std::size_t r : rows) v.push_back(c.values()[r]);
    cols.emplace_back(c.spec(), std::move(v), c.levels(), c.raw_pairs());
  }
  return Dataset(std::move(cols));
}

std::vector<std::vector<std::string>> read_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.size() == 1 && row.front().empty();
    if (!blank) records.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::validation, "unterminated quoted field in CSV");
  if (!field.empty() || !row.empty()) end_row();
  return records;
}

std::string quote_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

Dataset parse_csv(std::string_view text, const std::vector<ColumnSpec>& schema) {
  auto records = read_csv_records(text);
  if (records.empty()) throw Error(ErrorKind::schema, "CSV has no header row");
  const auto& header = records.front();
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    position.emplace(std::string(trim(header[i])), i);
  }
  std::vector<std::size_t> source;
  for (const auto& spec : schema) {
    auto it = position.find(spec.name);
    if (it == position.end()) {
      throw Error(ErrorKind::schema, "column '" + spec.name + "' missing from CSV header");
    }
    source.push_back(it->second);
  }
  const std::size_t n = records.size() - 1;

  std::vector<Column> columns;
  columns.reserve(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema[c];
    if (spec.transform != PreTransform::none && spec.scale != Scale::continuous) {
      throw Error(ErrorKind::config,
                  "column '" + spec.name + "': pre-transforms apply to continuous columns only");
    }
    std::vector<std::string_view> cells(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      if (source[c] >= rec.size()) {
        throw Error(ErrorKind::validation, "missing value in column '" + spec.name +
                                               "' at row " + std::to_string(r + 1));
      }
      cells[r] = trim(rec[source[c]]);
      if (is_missing(cells[r])) {
        throw Error(ErrorKind::validation, "missing value in column '" + spec.name +
                                               "' at row " + std::to_string(r + 1));
      }
    }

    std::vector<double> values(n);
    std::vector<std::string> levels;
    if (spec.scale == Scale::categorical) {
      std::set<std::string_view> uniq(cells.begin(), cells.end());
      levels.assign(uniq.begin(), uniq.end());
      for (std::size_t r = 0; r < n; ++r) {
        auto it = std::lower_bound(levels.begin(), levels.end(), cells[r]);
        values[r] = static_cast<double>(it - levels.begin());
      }
      columns.emplace_back(spec, std::move(values), std::move(levels));
      continue;
    }

    std::vector<std::pair<double, double>> raw_pairs;
    for (std::size_t r = 0; r < n; ++r) {
      auto v = parse_double(cells[r]);
      auto where = [&] {
        return "column '" + spec.name + "' at row " + std::to_string(r + 1) + " ('" +
               std::string(cells[r]) + "')";
      };
      if (!v) throw Error(ErrorKind::type, "non-numeric value in " + where());
      switch (spec.scale) {
        case Scale::count:
          if (*v < 0 || *v != std::floor(*v)) {
            throw Error(ErrorKind::type, "non-integer or negative count in " + where());
          }
          break;
        case Scale::binary:
          if (*v != 0.0 && *v != 1.0) {
            throw Error(ErrorKind::type, "binary value not in {0,1} in " + where());
          }
          break;
        default:
          if (spec.transform == PreTransform::log && *v <= 0) {
            throw Error(ErrorKind::type, "log transform needs positive values; " + where());
          }
      }
      values[r] = apply_pre_transform(spec.transform, *v);
      if (spec.transform != PreTransform::none) raw_pairs.emplace_back(values[r], *v);
    }
    columns.emplace_back(spec, std::move(values), std::vector<std::string>{},
                         std::move(raw_pairs));
  }
  if (n == 0) throw Error(ErrorKind::validation, "CSV has no data rows");
  return Dataset(std::move(columns));
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
  return parse_csv(read_file(path), schema);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  const auto& cols = ds.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out.push_back(',');
    out += quote_csv_field(cols[c].name());
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out.push_back(',');
      out += cols[c].format(r);
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::string& path, const Dataset& ds) { write_file(path, to_csv(ds)); }

void validate_roles(const Dataset& ds, bool require_protected) {
  auto responses = ds.with_role(Role::response);
  if (responses.size() != 1) {
    throw Error(ErrorKind::role, "expected exactly one response column, found " +
                                     std::to_string(responses.size()));
  }
  if (require_protected && ds.with_role(Role::protected_attr).empty()) {
    throw Error(ErrorKind::role, "at least one protected column is required");
  }
}

}  // namespace parity_forge
