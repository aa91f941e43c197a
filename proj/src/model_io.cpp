#include "copula/model_io.hpp"

#include "copula/errors.hpp"

#include <fstream>
#include <sstream>

namespace copula {

namespace {

constexpr const char* kMagic = "copula-marginals\t1";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_numbers(const std::vector<std::string>& fields, std::size_t from, int line_no) {
  std::vector<double> out;
  for (std::size_t k = from; k < fields.size(); ++k) {
    double v;
    if (!parse_double(fields[k], v))
      throw ParseError("marginals line " + std::to_string(line_no) + ": bad number '" + fields[k] + "'");
    out.push_back(v);
  }
  return out;
}

ColumnSchema schema_from_tables(const std::vector<std::string>& names, const std::vector<VariableKind>& kinds,
                                const std::vector<std::vector<std::string>>& labels) {
  ColumnSchema schema;
  for (std::size_t j = 0; j < names.size(); ++j) {
    ColumnOverride o;
    o.kind = kinds[j].tag;
    if (kinds[j].is_ordinal()) o.levels = labels[j];
    schema.overrides[names[j]] = std::move(o);
  }
  return schema;
}

}  // namespace

StoredModel make_stored_model(FitResult fit, const MixedDataMatrix& data) {
  return {std::move(fit), data.column_names(), data.label_tables()};
}

std::string format_sigma_csv(const CorrelationMatrix& sigma, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t j = 0; j < names.size(); ++j) out += (j ? "," : "") + csv_escape(names[j]);
  out += "\n";
  for (Eigen::Index i = 0; i < sigma.dim(); ++i) {
    for (Eigen::Index j = 0; j < sigma.dim(); ++j) out += (j ? "," : "") + format_double(sigma(i, j));
    out += "\n";
  }
  return out;
}

CorrelationMatrix parse_sigma_csv(const std::string& text, std::vector<std::string>* names) {
  const auto records = split_csv_records(text);
  if (records.empty()) throw ParseError("sigma CSV is empty");
  const auto p = static_cast<Eigen::Index>(records.front().size());
  if (static_cast<Eigen::Index>(records.size()) != p + 1)
    throw ParseError("sigma CSV must have a header and " + std::to_string(p) + " rows");
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (static_cast<Eigen::Index>(records[i + 1].size()) != p) throw ParseError("sigma CSV is not square");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!parse_double(records[i + 1][j], m(i, j)))
        throw ParseError("sigma CSV: bad number at row " + std::to_string(i + 1));
    }
  }
  if (names) *names = records.front();
  return CorrelationMatrix(std::move(m));
}

std::string format_marginals(const StoredModel& model) {
  std::string out = std::string(kMagic) + "\t" + std::to_string(model.fit.marginals.size()) + "\n";
  for (std::size_t j = 0; j < model.fit.marginals.size(); ++j) {
    const auto& name = model.column_names[j];
    if (const auto* c = std::get_if<ContinuousMarginal>(&model.fit.marginals[j])) {
      out += "column\t" + name + "\tcontinuous\t" + std::to_string(c->n_obs()) + "\nvalues";
      for (double v : c->sorted_observed()) out += "\t" + format_double(v);
      out += "\n";
    } else {
      const auto& o = std::get<OrdinalMarginal>(model.fit.marginals[j]);
      out += "column\t" + name + "\tordinal\t" + std::to_string(o.level_count()) + "\ncutoffs";
      for (double v : o.cutoffs()) out += "\t" + format_double(v);
      out += "\nlabels";
      for (const auto& l : model.labels[j]) out += "\t" + l;
      out += "\n";
    }
  }
  return out;
}

// Stored marginals that fail validation are reported as a malformed file.
template <class Make>
auto checked(int line_no, Make make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("marginals line " + std::to_string(line_no) + ": " + e.what());
  }
}

StoredModel parse_marginals(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) throw ParseError("not a marginals file");
  const std::string declared = line.substr(std::string(kMagic).size() + (line.size() > std::string(kMagic).size()));
  StoredModel model;
  std::vector<VariableKind> kinds;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw ParseError(std::string("marginals file truncated, expected ") + key);
    ++line_no;
    auto fields = split_tabs(line);
    if (fields.front() != key)
      throw ParseError("marginals line " + std::to_string(line_no) + ": expected '" + key + "'");
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto head = split_tabs(line);
    if (head.size() != 4 || head[0] != "column")
      throw ParseError("marginals line " + std::to_string(line_no) + ": expected a column header");
    model.column_names.push_back(head[1]);
    if (head[2] == "continuous") {
      const auto values = parse_numbers(next("values"), 1, line_no);
      if (std::to_string(values.size()) != head[3])
        throw ParseError("marginals line " + std::to_string(line_no) + ": expected " + head[3] + " values");
      model.fit.marginals.emplace_back(checked(line_no, [&] { return ContinuousMarginal(values); }));
      model.labels.emplace_back();
    } else if (head[2] == "ordinal") {
      auto cutoffs = parse_numbers(next("cutoffs"), 1, line_no);
      auto labels = next("labels");
      labels.erase(labels.begin());
      auto m = checked(line_no, [&] { return OrdinalMarginal(std::move(cutoffs)); });
      if (std::to_string(m.level_count()) != head[3])
        throw ParseError("marginals line " + std::to_string(line_no) + ": expected " + head[3] + " levels");
      if (static_cast<int>(labels.size()) != m.level_count())
        throw ParseError("marginals line " + std::to_string(line_no) + ": label count differs from level count");
      model.fit.marginals.emplace_back(std::move(m));
      model.labels.push_back(std::move(labels));
    } else {
      throw ParseError("marginals line " + std::to_string(line_no) + ": unknown kind '" + head[2] + "'");
    }
  }
  if (declared != std::to_string(model.fit.marginals.size()))
    throw ParseError("marginals file declares " + declared + " columns but holds " +
                     std::to_string(model.fit.marginals.size()));
  model.fit.sigma = CorrelationMatrix::identity(static_cast<Eigen::Index>(model.fit.marginals.size()));
  return model;
}

void save_model(const StoredModel& model, const std::filesystem::path& sigma_path,
                const std::filesystem::path& marginals_path) {
  write_text_file(sigma_path, format_sigma_csv(model.fit.sigma, model.column_names));
  write_text_file(marginals_path, format_marginals(model));
}

StoredModel load_model(const std::filesystem::path& sigma_path, const std::filesystem::path& marginals_path) {
  auto model = parse_marginals(read_text_file(marginals_path));
  std::vector<std::string> names;
  auto sigma = parse_sigma_csv(read_text_file(sigma_path), &names);
  if (names != model.column_names) throw ParseError("sigma and marginals files disagree on column names");
  model.fit.sigma = std::move(sigma);
  return model;
}

ColumnSchema schema_for(const StoredModel& model) {
  std::vector<VariableKind> kinds;
  for (const auto& m : model.fit.marginals) kinds.push_back(kind_of(m));
  return schema_from_tables(model.column_names, kinds, model.labels);
}

ColumnSchema schema_for(const MixedDataMatrix& data) {
  return schema_from_tables(data.column_names(), data.kinds(), data.label_tables());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace copula
