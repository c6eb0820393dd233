#include "privscore/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "privscore/format.hpp"
#include "privscore/rng.hpp"

namespace privscore {

std::string to_string(ColumnKind k) {
  return k == ColumnKind::binary ? "binary" : "numeric";
}

std::string to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::pa: return "pa";
    case ColumnRole::confounder: return "confounder";
    case ColumnRole::feature: return "feature";
    case ColumnRole::target: return "target";
    case ColumnRole::ignore: return "ignore";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "binary") return ColumnKind::binary;
  if (s == "numeric") return ColumnKind::numeric;
  throw InputError("unknown column kind '" + s + "' (expected binary|numeric)");
}

ColumnRole column_role_from_string(const std::string& s) {
  if (s == "pa") return ColumnRole::pa;
  if (s == "confounder") return ColumnRole::confounder;
  if (s == "feature") return ColumnRole::feature;
  if (s == "target") return ColumnRole::target;
  if (s == "ignore") return ColumnRole::ignore;
  throw InputError("unknown column role '" + s + "'");
}

DatasetTable::DatasetTable(std::vector<ColumnSpec> columns, std::size_t n_rows)
    : specs_(std::move(columns)), n_rows_(n_rows) {
  data_.assign(specs_.size(), std::vector<double>(n_rows_, 0.0));
}

int DatasetTable::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (specs_[c].name == name) return static_cast<int>(c);
  }
  return -1;
}

int DatasetTable::require_column(const std::string& name) const {
  int c = column_index(name);
  if (c < 0) throw InputError("column '" + name + "' not present in table");
  return c;
}

std::vector<double> DatasetTable::row(std::size_t r) const {
  std::vector<double> out(n_cols());
  for (std::size_t c = 0; c < n_cols(); ++c) out[c] = data_[c][r];
  return out;
}

void DatasetTable::set_row(std::size_t r, std::span<const double> values) {
  for (std::size_t c = 0; c < n_cols(); ++c) data_[c][r] = values[c];
}

int DatasetTable::pa_column() const {
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (specs_[c].role == ColumnRole::pa) return static_cast<int>(c);
  }
  return -1;
}

int DatasetTable::target_column() const {
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (specs_[c].role == ColumnRole::target) return static_cast<int>(c);
  }
  return -1;
}

std::vector<int> DatasetTable::model_feature_columns() const {
  std::vector<int> cols;
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    switch (specs_[c].role) {
      case ColumnRole::pa:
      case ColumnRole::confounder:
      case ColumnRole::feature:
        cols.push_back(static_cast<int>(c));
        break;
      default:
        break;
    }
  }
  return cols;
}

DatasetTable DatasetTable::select_rows(const std::vector<int>& indices) const {
  DatasetTable out(specs_, indices.size());
  out.advantaged_level = advantaged_level;
  for (std::size_t c = 0; c < n_cols(); ++c) {
    const auto& src = data_[c];
    auto& dst = out.data_[c];
    for (std::size_t i = 0; i < indices.size(); ++i) dst[i] = src[indices[i]];
  }
  return out;
}

void DatasetTable::check_ingestion_invariants() const {
  if (n_rows_ == 0) throw InputError("table has no rows");
  int pa_count = 0;
  int target_count = 0;
  for (const auto& s : specs_) {
    if (s.role == ColumnRole::pa) ++pa_count;
    if (s.role == ColumnRole::target) ++target_count;
  }
  if (pa_count != 1) {
    throw InputError("expected exactly one pa column, found " + std::to_string(pa_count));
  }
  if (target_count != 1) {
    throw InputError("expected exactly one target column, found " + std::to_string(target_count));
  }
  for (std::size_t c = 0; c < specs_.size(); ++c) {
    if (specs_[c].kind != ColumnKind::binary) continue;
    for (std::size_t r = 0; r < n_rows_; ++r) {
      double v = data_[c][r];
      if (v != 0.0 && v != 1.0) {
        throw InputError("non-binary value " + format_f6(v) + " in binary column '" +
                         specs_[c].name + "', row " + std::to_string(r + 1));
      }
    }
  }
}

namespace {

// RFC-4180 record reader: returns one record per call, handling quoted
// fields with embedded commas, escaped quotes, and newlines; tolerates CRLF.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    saw_any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field += c;
    }
  }
  if (!saw_any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open CSV file: " + path);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  while (read_csv_record(in, fields)) {
    // Skip completely blank records (e.g. trailing newline).
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    records.push_back(fields);
  }
  if (records.empty()) throw InputError("CSV file has no header row: " + path);
  return records;
}

}  // namespace

DatasetTable load_csv(const std::string& path, const std::vector<ColumnSpec>& specs) {
  auto records = read_csv_file(path);
  const auto& header = records[0];

  std::vector<int> spec_to_field(specs.size(), -1);
  for (std::size_t h = 0; h < header.size(); ++h) {
    const std::string name = trim(header[h]);
    bool known = false;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      if (specs[s].name == name) {
        spec_to_field[s] = static_cast<int>(h);
        known = true;
        break;
      }
    }
    if (!known) throw InputError("unknown column '" + name + "' in " + path);
  }
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (spec_to_field[s] < 0) {
      throw InputError("column '" + specs[s].name + "' missing from " + path);
    }
  }

  DatasetTable table(specs, records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw InputError("row " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, expected " +
                       std::to_string(header.size()) + " in " + path);
    }
    for (std::size_t s = 0; s < specs.size(); ++s) {
      double v;
      if (!parse_double(records[r][spec_to_field[s]], v)) {
        throw InputError("cannot parse value '" + records[r][spec_to_field[s]] +
                         "' in column '" + specs[s].name + "', row " + std::to_string(r));
      }
      table.set(r - 1, s, v);
    }
  }
  table.check_ingestion_invariants();
  return table;
}

void write_csv(const DatasetTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write CSV file: " + path);
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (c) out << ',';
    out << csv_field(table.column(c).name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (c) out << ',';
      out << format_f6(table.at(r, c));
    }
    out << '\n';
  }
}

std::vector<ColumnSpec> load_column_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open column spec file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("column spec file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("column spec file must be a JSON object: " + path);
  std::vector<ColumnSpec> specs;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ColumnSpec s;
    s.name = it.key();
    const auto& v = it.value();
    if (!v.is_object() || !v.contains("kind") || !v.contains("role")) {
      throw InputError("column '" + s.name + "' needs {kind, role} in " + path);
    }
    s.kind = column_kind_from_string(v.at("kind").get<std::string>());
    s.role = column_role_from_string(v.at("role").get<std::string>());
    specs.push_back(s);
  }
  if (specs.empty()) throw InputError("column spec file defines no columns: " + path);
  return specs;
}

Recipe recipe_from_string(const std::string& s) {
  if (s == "hmda") return Recipe::hmda;
  if (s == "lawschool") return Recipe::lawschool;
  throw InputError("unknown recipe '" + s + "' (expected hmda|lawschool)");
}

namespace {

std::vector<ColumnSpec> hmda_encoded_schema() {
  return {
      {"race", ColumnKind::binary, ColumnRole::pa},
      {"sex", ColumnKind::binary, ColumnRole::confounder},
      {"age", ColumnKind::binary, ColumnRole::confounder},
      {"amount", ColumnKind::numeric, ColumnRole::feature},
      {"debt", ColumnKind::binary, ColumnRole::feature},
      {"purpose", ColumnKind::binary, ColumnRole::feature},
      {"action", ColumnKind::binary, ColumnRole::target},
  };
}

std::vector<ColumnSpec> lawschool_encoded_schema() {
  return {
      {"race", ColumnKind::binary, ColumnRole::pa},
      {"ugpa", ColumnKind::numeric, ColumnRole::feature},
      {"lsat", ColumnKind::numeric, ColumnRole::feature},
      {"pass", ColumnKind::binary, ColumnRole::target},
  };
}

bool matches_schema(const DatasetTable& t, const std::vector<ColumnSpec>& schema) {
  if (t.n_cols() != schema.size()) return false;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& a = t.column(c);
    const auto& b = schema[c];
    if (a.name != b.name || a.kind != b.kind || a.role != b.role) return false;
  }
  return true;
}

}  // namespace

DatasetTable apply_recipe(const DatasetTable& raw, Recipe recipe) {
  const auto schema = recipe == Recipe::hmda ? hmda_encoded_schema() : lawschool_encoded_schema();
  if (matches_schema(raw, schema)) return raw;  // already encoded

  DatasetTable out(schema, raw.n_rows());
  out.advantaged_level = 1.0;
  if (recipe == Recipe::hmda) {
    const int c_action = raw.require_column("action_taken");
    const int c_race = raw.require_column("derived_race");
    const int c_dti = raw.require_column("debt_to_income_ratio");
    const int c_purpose = raw.require_column("loan_purpose");
    const int c_age = raw.require_column("age_above_62");
    const int c_sex = raw.require_column("applicant_sex");
    const int c_amount = raw.require_column("loan_amount");
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
      out.set(r, 0, raw.at(r, c_race) == 1.0 ? 1.0 : 0.0);
      out.set(r, 1, raw.at(r, c_sex) == 1.0 ? 1.0 : 0.0);
      out.set(r, 2, raw.at(r, c_age) == 1.0 ? 1.0 : 0.0);
      out.set(r, 3, raw.at(r, c_amount));
      out.set(r, 4, raw.at(r, c_dti) < 36.0 ? 1.0 : 0.0);
      out.set(r, 5, raw.at(r, c_purpose) == 1.0 ? 1.0 : 0.0);
      out.set(r, 6, raw.at(r, c_action) == 1.0 ? 1.0 : 0.0);
    }
  } else {
    const int c_race = raw.require_column("race");
    const int c_ugpa = raw.require_column("ugpa");
    const int c_lsat = raw.require_column("lsat");
    const int c_pass = raw.require_column("pass_bar");
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
      out.set(r, 0, raw.at(r, c_race) == 0.0 ? 0.0 : 1.0);
      out.set(r, 1, raw.at(r, c_ugpa));
      out.set(r, 2, raw.at(r, c_lsat));
      out.set(r, 3, raw.at(r, c_pass) == 1.0 ? 1.0 : 0.0);
    }
  }
  out.check_ingestion_invariants();
  return out;
}

namespace {

bool iequals(const std::string& a, const char* b) {
  std::size_t n = std::string(b).size();
  if (a.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool icontains(const std::string& hay, const char* needle) {
  std::string h = hay;
  std::string n = needle;
  std::transform(h.begin(), h.end(), h.begin(), ::tolower);
  std::transform(n.begin(), n.end(), n.begin(), ::tolower);
  return h.find(n) != std::string::npos;
}

// Decoders return false when a cell cannot be mapped; the row is dropped.

bool decode_white_indicator(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) {
    if (v == 0.0 || v == 1.0) { out = v; return true; }
    return false;
  }
  if (trim(cell).empty()) return false;
  if (icontains(cell, "not available") || icontains(cell, "free form")) return false;
  out = iequals(trim(cell), "White") ? 1.0 : 0.0;
  return true;
}

bool decode_dti(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) { out = v; return true; }
  const std::string s = trim(cell);
  if (s == "<20%") { out = 10.0; return true; }
  if (s == "20%-<30%") { out = 25.0; return true; }
  if (s == "30%-<36%") { out = 33.0; return true; }
  if (s == "50%-60%") { out = 55.0; return true; }
  if (s == ">60%") { out = 65.0; return true; }
  return false;  // "Exempt", "NA", blanks
}

bool decode_age_above_62(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) {
    if (v == 0.0 || v == 1.0) { out = v; return true; }
    return false;
  }
  const std::string s = trim(cell);
  if (iequals(s, "Yes")) { out = 1.0; return true; }
  if (iequals(s, "No")) { out = 0.0; return true; }
  return false;
}

bool decode_sex(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) {
    if (v == 1.0) { out = 1.0; return true; }  // male
    if (v == 2.0) { out = 0.0; return true; }  // female
    return false;                              // joint / not provided codes
  }
  const std::string s = trim(cell);
  if (iequals(s, "Male")) { out = 1.0; return true; }
  if (iequals(s, "Female")) { out = 0.0; return true; }
  return false;
}

bool decode_nonblack_indicator(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) {
    if (v == 0.0 || v == 1.0) { out = v; return true; }
    return false;
  }
  if (trim(cell).empty()) return false;
  out = icontains(cell, "black") ? 0.0 : 1.0;
  return true;
}

bool decode_pass(const std::string& cell, double& out) {
  double v;
  if (parse_double(cell, v)) {
    if (v == 0.0 || v == 1.0) { out = v; return true; }
    return false;
  }
  const std::string s = trim(cell);
  if (iequals(s, "P") || iequals(s, "pass") || iequals(s, "passed") || iequals(s, "TRUE")) {
    out = 1.0;
    return true;
  }
  if (iequals(s, "F") || iequals(s, "fail") || iequals(s, "failed") || iequals(s, "FALSE")) {
    out = 0.0;
    return true;
  }
  return false;
}

bool decode_positive(const std::string& cell, double& out) {
  double v;
  if (!parse_double(cell, v) || !(v > 0.0) || !std::isfinite(v)) return false;
  out = v;
  return true;
}

bool decode_number(const std::string& cell, double& out) {
  double v;
  if (!parse_double(cell, v) || !std::isfinite(v)) return false;
  out = v;
  return true;
}

}  // namespace

DatasetTable load_recipe_csv(const std::string& path, Recipe recipe,
                             std::size_t* rejected_rows) {
  auto records = read_csv_file(path);
  const auto& header = records[0];
  auto field_of = [&](const char* name) -> int {
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (iequals(trim(header[h]), name)) return static_cast<int>(h);
    }
    return -1;
  };
  auto require_field = [&](const char* name) -> int {
    int f = field_of(name);
    if (f < 0) throw InputError(std::string("column '") + name + "' missing from " + path);
    return f;
  };

  struct SourceColumn {
    ColumnSpec spec;
    int field;
    bool (*decode)(const std::string&, double&);
  };
  std::vector<SourceColumn> sources;
  if (recipe == Recipe::hmda) {
    // The public HMDA LAR export encodes age 62+ either as its own yes/no
    // column or not at all; accept both spellings.
    int age_field = field_of("applicant_age_above_62");
    if (age_field < 0) age_field = require_field("age_above_62");
    sources = {
        {{"action_taken", ColumnKind::numeric, ColumnRole::ignore}, require_field("action_taken"), decode_number},
        {{"derived_race", ColumnKind::binary, ColumnRole::ignore}, require_field("derived_race"), decode_white_indicator},
        {{"debt_to_income_ratio", ColumnKind::numeric, ColumnRole::ignore}, require_field("debt_to_income_ratio"), decode_dti},
        {{"loan_purpose", ColumnKind::numeric, ColumnRole::ignore}, require_field("loan_purpose"), decode_number},
        {{"age_above_62", ColumnKind::binary, ColumnRole::ignore}, age_field, decode_age_above_62},
        {{"applicant_sex", ColumnKind::binary, ColumnRole::ignore}, require_field("applicant_sex"), decode_sex},
        {{"loan_amount", ColumnKind::numeric, ColumnRole::ignore}, require_field("loan_amount"), decode_positive},
    };
  } else {
    sources = {
        {{"race", ColumnKind::binary, ColumnRole::ignore}, require_field("race"), decode_nonblack_indicator},
        {{"ugpa", ColumnKind::numeric, ColumnRole::ignore}, require_field("ugpa"), decode_positive},
        {{"lsat", ColumnKind::numeric, ColumnRole::ignore}, require_field("lsat"), decode_positive},
        {{"pass_bar", ColumnKind::binary, ColumnRole::ignore}, require_field("pass_bar"), decode_pass},
    };
  }

  std::vector<std::vector<double>> kept;
  std::size_t rejected = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      ++rejected;
      continue;
    }
    std::vector<double> vals(sources.size());
    bool ok = true;
    for (std::size_t s = 0; s < sources.size() && ok; ++s) {
      ok = sources[s].decode(records[r][sources[s].field], vals[s]);
    }
    if (ok) {
      kept.push_back(std::move(vals));
    } else {
      ++rejected;
    }
  }
  if (kept.empty()) throw InputError("no usable rows after decoding " + path);
  if (rejected_rows) *rejected_rows = rejected;
  if (rejected > 0) {
    std::cerr << "note: dropped " << rejected << " row(s) with unmappable cells from "
              << path << "\n";
  }

  std::vector<ColumnSpec> specs;
  specs.reserve(sources.size());
  for (const auto& s : sources) specs.push_back(s.spec);
  DatasetTable raw(specs, kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) raw.set_row(r, kept[r]);
  return apply_recipe(raw, recipe);
}

SplitIndices split(const DatasetTable& table, double fraction, std::uint64_t seed) {
  const std::size_t n = table.n_rows();
  if (n < 2) throw InputError("split requires at least 2 rows");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InputError("split fraction must lie in (0,1)");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = rng_stream(seed, {rng_tag::split});
  rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  SplitIndices out;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  out.test.assign(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace privscore
