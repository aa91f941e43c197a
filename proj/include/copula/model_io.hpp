#pragma once

#include "copula/data_model.hpp"
#include "copula/em_engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace copula {

/// A fitted model plus what is needed to read and write data against it.
struct StoredModel {
  FitResult fit;
  std::vector<std::string> column_names;
  /// Ordinal label tables (empty for continuous columns).
  std::vector<std::vector<std::string>> labels;
};

StoredModel make_stored_model(FitResult fit, const MixedDataMatrix& data);

/// Sigma as a p x p CSV with the column names as header.
std::string format_sigma_csv(const CorrelationMatrix& sigma, const std::vector<std::string>& names);
CorrelationMatrix parse_sigma_csv(const std::string& text, std::vector<std::string>* names = nullptr);

/// Tab-separated sidecar: per column a `column` line followed by either a
/// `values` line (continuous) or `cutoffs` and `labels` lines (ordinal).
std::string format_marginals(const StoredModel& model);
/// Returns a model whose sigma is the identity; pair with parse_sigma_csv.
StoredModel parse_marginals(const std::string& text);

void save_model(const StoredModel& model, const std::filesystem::path& sigma_path,
                const std::filesystem::path& marginals_path);
StoredModel load_model(const std::filesystem::path& sigma_path, const std::filesystem::path& marginals_path);

/// Schema that reads a CSV with this model's kinds and ordinal level tables.
ColumnSchema schema_for(const StoredModel& model);
/// Schema that reproduces the kinds and label tables of `data`.
ColumnSchema schema_for(const MixedDataMatrix& data);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace copula
