#include "copula/data_model.hpp"

#include "copula/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace copula {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void validate_kind(const VariableKind& kind) {
  if (kind.is_ordinal() && kind.level_count < 1)
    throw InvalidArgument("ordinal level count must be at least 1");
}

// Ordered level table for one ordinal column: the first textual spelling
// of each distinct value, sorted numerically when every label is a number.
std::vector<std::string> build_levels(const std::vector<std::string>& observed,
                                      const ColumnOverride* override_,
                                      const std::string& column) {
  if (override_ != nullptr && !override_->levels.empty()) {
    for (const auto& s : observed) {
      double v = 0.0;
      const bool numeric = parse_double(s, v);
      const bool known = std::any_of(override_->levels.begin(), override_->levels.end(), [&](const auto& l) {
        double lv = 0.0;
        return l == s || (numeric && parse_double(l, lv) && lv == v);
      });
      if (!known) throw ParseError("column '" + column + "': value '" + s + "' not in declared levels");
    }
    return override_->levels;
  }
  bool numeric = true;
  for (const auto& s : observed) {
    double v;
    if (!parse_double(s, v)) {
      numeric = false;
      break;
    }
  }
  std::vector<std::string> levels;
  if (numeric) {
    std::vector<std::pair<double, std::string>> seen;
    for (const auto& s : observed) {
      double v;
      parse_double(s, v);
      const bool dup = std::any_of(seen.begin(), seen.end(), [&](const auto& e) { return e.first == v; });
      if (!dup) seen.emplace_back(v, s);
    }
    std::sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& e : seen) levels.push_back(std::move(e.second));
  } else {
    const std::set<std::string> distinct(observed.begin(), observed.end());
    levels.assign(distinct.begin(), distinct.end());
  }
  return levels;
}

}  // namespace

VariableKind VariableKind::ordinal(int levels) {
  if (levels < 1) throw InvalidArgument("ordinal level count must be at least 1");
  return {Tag::Ordinal, levels};
}

std::string to_string(const VariableKind& kind) {
  if (kind.is_continuous()) return "continuous";
  return "ordinal(" + std::to_string(kind.level_count) + ")";
}

MixedDataMatrix::MixedDataMatrix(Eigen::MatrixXd values, MaskMatrix mask,
                                 std::vector<VariableKind> kinds,
                                 std::vector<std::string> column_names,
                                 std::vector<std::vector<std::string>> labels)
    : values_(std::move(values)),
      mask_(std::move(mask)),
      kinds_(std::move(kinds)),
      names_(std::move(column_names)),
      labels_(std::move(labels)) {
  const auto n = values_.rows();
  const auto p = values_.cols();
  if (mask_.rows() != n || mask_.cols() != p)
    throw InvalidArgument("mask shape does not match values");
  if (static_cast<Eigen::Index>(kinds_.size()) != p)
    throw InvalidArgument("kind count does not match column count");
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) names_.push_back("V" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names_.size()) != p)
    throw InvalidArgument("column name count does not match column count");
  if (labels_.empty()) labels_.resize(p);
  if (static_cast<Eigen::Index>(labels_.size()) != p)
    throw InvalidArgument("label table count does not match column count");

  for (Eigen::Index j = 0; j < p; ++j) {
    validate_kind(kinds_[j]);
    if (kinds_[j].is_ordinal()) {
      auto& table = labels_[j];
      if (table.empty()) {
        for (int l = 1; l <= kinds_[j].level_count; ++l) table.push_back(std::to_string(l));
      }
      if (static_cast<int>(table.size()) != kinds_[j].level_count)
        throw InvalidArgument("column '" + names_[j] + "': label table size differs from level count");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!mask_(i, j)) {
        values_(i, j) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double v = values_(i, j);
      if (!std::isfinite(v))
        throw InvalidArgument("column '" + names_[j] + "': non-finite observed value at row " +
                              std::to_string(i + 1));
      if (kinds_[j].is_ordinal()) {
        if (v != std::round(v) || v < 1 || v > kinds_[j].level_count)
          throw InvalidArgument("column '" + names_[j] + "': invalid level " + format_double(v) +
                                " at row " + std::to_string(i + 1));
      }
    }
  }
}

std::vector<double> MixedDataMatrix::observed_column(Eigen::Index j) const {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < rows(); ++i) {
    if (mask_(i, j)) out.push_back(values_(i, j));
  }
  return out;
}

Eigen::Index MixedDataMatrix::observed_count(Eigen::Index j) const { return mask_.col(j).count(); }

MixedDataMatrix MixedDataMatrix::with_mask(const MaskMatrix& mask) const {
  return MixedDataMatrix(values_, mask, kinds_, names_, labels_);
}

MixedDataMatrix MixedDataMatrix::with_values(Eigen::MatrixXd values, MaskMatrix mask) const {
  return MixedDataMatrix(std::move(values), std::move(mask), kinds_, names_, labels_);
}

ColumnSchema parse_schema(const std::string& text) {
  ColumnSchema schema;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    std::map<std::string, std::string> fields;
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ParseError("schema line " + std::to_string(line_no) + ": expected key=value, got '" + token + "'");
      fields[token.substr(0, eq)] = token.substr(eq + 1);
    }

    if (fields.contains("threshold")) {
      int t = 0;
      const auto& s = fields["threshold"];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), t);
      if (ec != std::errc() || ptr != s.data() + s.size() || t < 2)
        throw ParseError("schema line " + std::to_string(line_no) + ": threshold must be an integer >= 2");
      schema.ordinal_threshold = t;
    }
    if (fields.contains("missing")) schema.missing_markers = split(fields["missing"], '|');
    if (!fields.contains("column")) {
      if (fields.contains("kind") || fields.contains("levels"))
        throw ParseError("schema line " + std::to_string(line_no) + ": missing column=<name>");
      continue;
    }
    ColumnOverride override_;
    const auto kind = fields.contains("kind") ? fields["kind"] : std::string{};
    if (kind == "continuous") {
      override_.kind = VariableKind::Tag::Continuous;
    } else if (kind == "ordinal") {
      override_.kind = VariableKind::Tag::Ordinal;
    } else {
      throw ParseError("schema line " + std::to_string(line_no) + ": kind must be continuous or ordinal");
    }
    if (fields.contains("levels")) {
      if (override_.kind != VariableKind::Tag::Ordinal)
        throw ParseError("schema line " + std::to_string(line_no) + ": levels= requires kind=ordinal");
      override_.levels = split(fields["levels"], '|');
    }
    schema.overrides[fields["column"]] = std::move(override_);
  }
  return schema;
}

ColumnSchema read_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::vector<std::vector<std::string>> split_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
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
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !record.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        field_started = false;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

MixedDataMatrix parse_csv(const std::string& text, const ColumnSchema& schema) {
  auto records = split_csv_records(text);
  if (records.empty()) throw ParseError("CSV has no header row");
  const auto header = records.front();
  const auto p = static_cast<Eigen::Index>(header.size());
  const auto n = static_cast<Eigen::Index>(records.size()) - 1;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (static_cast<Eigen::Index>(records[i].size()) != p)
      throw ParseError("ragged CSV: row " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                       " fields, header has " + std::to_string(p));
  }
  for (const auto& [name, o] : schema.overrides) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw ParseError("schema names unknown column '" + name + "'");
  }

  const auto is_missing = [&](const std::string& cell) {
    const auto t = trim(cell);
    return std::find(schema.missing_markers.begin(), schema.missing_markers.end(), t) !=
           schema.missing_markers.end();
  };

  Eigen::MatrixXd values = Eigen::MatrixXd::Constant(n, p, std::numeric_limits<double>::quiet_NaN());
  MaskMatrix mask = MaskMatrix::Constant(n, p, false);
  std::vector<VariableKind> kinds(p);
  std::vector<std::vector<std::string>> labels(p);

  for (Eigen::Index j = 0; j < p; ++j) {
    const std::string& name = header[j];
    const auto it = schema.overrides.find(name);
    const ColumnOverride* override_ = it == schema.overrides.end() ? nullptr : &it->second;

    std::vector<std::string> observed;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& cell = records[i + 1][j];
      if (is_missing(cell)) continue;
      mask(i, j) = true;
      observed.push_back(trim(cell));
    }

    const bool declared_ordinal = override_ != nullptr && override_->kind == VariableKind::Tag::Ordinal;
    std::vector<double> numeric(observed.size());
    if (!declared_ordinal) {
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!mask(i, j)) continue;
        if (!parse_double(observed[k], numeric[k]))
          throw ParseError("non-numeric value '" + observed[k] + "' at row " + std::to_string(i + 1) +
                           ", column '" + name + "'");
        ++k;
      }
    }

    bool ordinal = declared_ordinal;
    if (override_ == nullptr) {
      std::vector<double> distinct = numeric;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      const bool integral = std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == std::round(v); });
      ordinal = integral && !distinct.empty() && static_cast<int>(distinct.size()) <= schema.ordinal_threshold;
    }

    if (!ordinal) {
      kinds[j] = VariableKind::continuous();
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (mask(i, j)) values(i, j) = numeric[k++];
      }
      continue;
    }

    auto levels = build_levels(observed, override_, name);
    if (levels.empty()) throw ParseError("ordinal column '" + name + "' has no observed values");
    kinds[j] = VariableKind::ordinal(static_cast<int>(levels.size()));
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!mask(i, j)) continue;
      const auto& cell = observed[k++];
      double v = 0.0;
      const bool cell_numeric = parse_double(cell, v);
      for (std::size_t l = 0; l < levels.size(); ++l) {
        double lv = 0.0;
        const bool match = cell == levels[l] || (cell_numeric && parse_double(levels[l], lv) && lv == v);
        if (match) {
          values(i, j) = static_cast<double>(l + 1);
          break;
        }
      }
    }
    labels[j] = std::move(levels);
  }
  return MixedDataMatrix(std::move(values), std::move(mask), std::move(kinds), header, std::move(labels));
}

MixedDataMatrix read_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
  return parse_csv(read_file(path), schema);
}

std::string format_csv(const MixedDataMatrix& data) {
  std::string out;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (j > 0) out.push_back(',');
    out += csv_escape(data.column_name(j));
  }
  out.push_back('\n');
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (j > 0) out.push_back(',');
      if (!data.observed(i, j)) continue;
      const double v = data.value(i, j);
      if (data.kind(j).is_ordinal()) {
        out += csv_escape(data.labels(j)[static_cast<std::size_t>(v) - 1]);
      } else {
        out += format_double(v);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const MixedDataMatrix& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_csv(data);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace copula
