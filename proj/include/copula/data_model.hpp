#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace copula {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Continuous, or ordinal with a fixed number of levels (binary is Ordinal(2)).
struct VariableKind {
  enum class Tag { Continuous, Ordinal };

  Tag tag = Tag::Continuous;
  int level_count = 0;

  static VariableKind continuous() { return {Tag::Continuous, 0}; }
  static VariableKind ordinal(int levels);

  bool is_continuous() const { return tag == Tag::Continuous; }
  bool is_ordinal() const { return tag == Tag::Ordinal; }
  bool is_binary() const { return is_ordinal() && level_count == 2; }

  friend bool operator==(const VariableKind&, const VariableKind&) = default;
};

std::string to_string(const VariableKind& kind);

/// An n x p table of mixed cells with an explicit observation mask.
///
/// Ordinal cells are stored as level indices 1..k; the per-column label
/// table maps them back to the text found on disk. Masked cells hold NaN.
/// Instances are immutable once built.
class MixedDataMatrix {
 public:
  MixedDataMatrix() = default;
  MixedDataMatrix(Eigen::MatrixXd values, MaskMatrix mask,
                  std::vector<VariableKind> kinds,
                  std::vector<std::string> column_names,
                  std::vector<std::vector<std::string>> labels = {});

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  double value(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  bool observed(Eigen::Index i, Eigen::Index j) const { return mask_(i, j); }

  const Eigen::MatrixXd& values() const { return values_; }
  const MaskMatrix& mask() const { return mask_; }
  const std::vector<VariableKind>& kinds() const { return kinds_; }
  const VariableKind& kind(Eigen::Index j) const { return kinds_[j]; }
  const std::vector<std::string>& column_names() const { return names_; }
  const std::string& column_name(Eigen::Index j) const { return names_[j]; }
  const std::vector<std::string>& labels(Eigen::Index j) const { return labels_[j]; }
  const std::vector<std::vector<std::string>>& label_tables() const { return labels_; }

  /// Observed entries of column j, in row order.
  std::vector<double> observed_column(Eigen::Index j) const;
  Eigen::Index observed_count(Eigen::Index j) const;

  /// Same schema, new mask. Newly unmasked cells must carry values.
  MixedDataMatrix with_mask(const MaskMatrix& mask) const;
  /// Same schema, new values and mask.
  MixedDataMatrix with_values(Eigen::MatrixXd values, MaskMatrix mask) const;

 private:
  Eigen::MatrixXd values_;
  MaskMatrix mask_;
  std::vector<VariableKind> kinds_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> labels_;
};

/// Per-column kind override read from a schema file.
struct ColumnOverride {
  VariableKind::Tag kind = VariableKind::Tag::Continuous;
  /// Explicit level order for ordinal columns (lowest first). Empty means
  /// numeric order, or lexicographic order for non-numeric labels.
  std::vector<std::string> levels;
};

struct ColumnSchema {
  std::map<std::string, ColumnOverride> overrides;
  /// Integer-valued columns with at most this many distinct observed values
  /// become ordinal.
  int ordinal_threshold = 20;
  std::vector<std::string> missing_markers = {"", "NA"};
};

/// Parses `column=<name> kind=<continuous|ordinal> [levels=a|b|c]` lines.
/// Also accepts `threshold=<n>` and `missing=<m1>|<m2>` lines; `#` starts a
/// comment.
ColumnSchema parse_schema(const std::string& text);
ColumnSchema read_schema(const std::filesystem::path& path);

MixedDataMatrix parse_csv(const std::string& text, const ColumnSchema& schema = {});
MixedDataMatrix read_csv(const std::filesystem::path& path, const ColumnSchema& schema = {});

std::string format_csv(const MixedDataMatrix& data);
void write_csv(const MixedDataMatrix& data, const std::filesystem::path& path);

/// Splits RFC-4180 text into records of fields.
std::vector<std::vector<std::string>> split_csv_records(const std::string& text);
/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);
/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Parses a finite decimal number occupying the whole (trimmed) string.
bool parse_double(const std::string& text, double& out);

}  // namespace copula
