#include "copula/cli.hpp"

#include "copula/errors.hpp"
#include "copula/evaluate.hpp"
#include "copula/imputer.hpp"
#include "copula/model_io.hpp"
#include "copula/parallel.hpp"
#include "copula/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>

namespace copula::cli {

namespace {

namespace fs = std::filesystem;

struct EmFlags {
  double tol = 0.01;
  int max_iter = 50;
  double ridge = 1e-8;
  std::string mode = "gauss-seidel";
  int threads = 1;

  EmConfig config() const {
    EmConfig c;
    c.tol = tol;
    c.max_iter = max_iter;
    c.ridge = ridge;
    c.update_mode = mode == "jacobi" ? UpdateMode::Jacobi : UpdateMode::GaussSeidel;
    c.threads = threads;
    return c;
  }
  ImputeConfig impute_config(int gibbs_sweeps) const {
    ImputeConfig c;
    c.update_mode = config().update_mode;
    c.ridge = ridge;
    c.threads = threads;
    c.gibbs_sweeps = gibbs_sweeps;
    return c;
  }
};

int default_threads() {
  if (const char* env = std::getenv("COPULA_IMPUTE_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void add_em_flags(CLI::App* app, EmFlags& flags) {
  app->add_option("--tol", flags.tol, "Relative Frobenius change that stops EM")->check(CLI::NonNegativeNumber);
  app->add_option("--max-iter", flags.max_iter, "Maximum EM iterations")->check(CLI::PositiveNumber);
  app->add_option("--ridge", flags.ridge, "Diagonal ridge for singular submatrices")->check(CLI::PositiveNumber);
  app->add_option("--mode", flags.mode, "Ordinal update order")->check(CLI::IsMember({"gauss-seidel", "jacobi"}));
  app->add_option("--threads", flags.threads, "Worker threads (default $COPULA_IMPUTE_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

ColumnSchema load_schema(const std::string& path) { return path.empty() ? ColumnSchema{} : read_schema(path); }

fs::path draw_path(const fs::path& base, int k) {
  fs::path out = base;
  out.replace_filename(base.stem().string() + "_draw" + std::to_string(k) + base.extension().string());
  return out;
}

void print_fit(std::ostream& out, const FitResult& fit) {
  out << "iterations " << fit.iterations << (fit.converged ? " (converged)" : " (not converged)");
  if (!fit.sigma_change_trace.empty()) out << ", last change " << fit.sigma_change_trace.back();
  out << "\n";
  if (fit.ridge_events > 0) out << "ridge applied to " << fit.ridge_events << " row factorizations\n";
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian copula imputation for mixed continuous/ordinal data"};
  app.require_subcommand(1);

  EmFlags em;
  em.threads = default_threads();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the copula correlation and marginals");
  std::string fit_input, fit_schema, sigma_out = "sigma.csv", marginals_out = "marginals.txt";
  fit_cmd->add_option("--input,-i", fit_input, "Input CSV")->required();
  fit_cmd->add_option("--schema", fit_schema, "Column schema file");
  fit_cmd->add_option("--sigma-out", sigma_out, "Where to write the correlation matrix");
  fit_cmd->add_option("--marginals-out", marginals_out, "Where to write the marginals sidecar");
  add_em_flags(fit_cmd, em);

  // impute
  auto* imp_cmd = app.add_subcommand("impute", "Fill missing cells");
  std::string imp_input, imp_schema, imp_sigma, imp_marginals, imp_output;
  int multiple = 1;
  std::uint64_t imp_seed = 0;
  int gibbs_sweeps = 20;
  imp_cmd->add_option("--input,-i", imp_input, "Input CSV with missing cells")->required();
  imp_cmd->add_option("--schema", imp_schema, "Column schema file (ignored with a saved model)");
  auto* sigma_opt = imp_cmd->add_option("--sigma", imp_sigma, "Saved correlation matrix");
  auto* marg_opt = imp_cmd->add_option("--marginals", imp_marginals, "Saved marginals sidecar");
  sigma_opt->needs(marg_opt);
  marg_opt->needs(sigma_opt);
  imp_cmd->add_option("--output,-o", imp_output, "Completed CSV")->required();
  imp_cmd->add_option("--multiple", multiple, "Number of sampled completions")->check(CLI::PositiveNumber);
  imp_cmd->add_option("--seed", imp_seed, "Seed for multiple imputation");
  imp_cmd->add_option("--gibbs-sweeps", gibbs_sweeps, "Gibbs sweeps per draw")->check(CLI::PositiveNumber);
  add_em_flags(imp_cmd, em);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic mixed dataset");
  Eigen::Index sim_n = 2000;
  int sim_p = 15;
  int sim_levels = 5;
  double sim_missing = 0.3;
  std::uint64_t sim_seed = 0;
  std::string sim_dir = ".";
  sim_cmd->add_option("--n", sim_n, "Rows")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--p", sim_p, "Columns (thirds: exponential, binary, ordinal)")->check(CLI::Range(2, 100000));
  sim_cmd->add_option("--levels", sim_levels, "Levels of the ordinal columns")->check(CLI::Range(2, 1000));
  sim_cmd->add_option("--missing", sim_missing, "MCAR missing ratio")->check(CLI::Range(0.0, 0.999999));
  sim_cmd->add_option("--seed", sim_seed, "Seed");
  sim_cmd->add_option("--out-dir", sim_dir, "Output directory");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score imputations or run a holdout experiment");
  std::string ev_truth, ev_masked, ev_imputed, ev_sigma, ev_sigma_truth, ev_input, ev_schema, ev_report;
  double holdout = 0.0;
  int repeats = 1;
  std::uint64_t ev_seed = 0;
  eval_cmd->add_option("--truth", ev_truth, "Complete ground-truth CSV");
  eval_cmd->add_option("--masked", ev_masked, "Masked CSV the imputation started from");
  eval_cmd->add_option("--imputed", ev_imputed, "Completed CSV (fit and impute --masked when absent)");
  eval_cmd->add_option("--sigma", ev_sigma, "Estimated correlation CSV");
  eval_cmd->add_option("--sigma-truth", ev_sigma_truth, "True correlation CSV");
  eval_cmd->add_option("--input,-i", ev_input, "Data CSV for a holdout experiment");
  eval_cmd->add_option("--schema", ev_schema, "Column schema file");
  eval_cmd->add_option("--holdout", holdout, "Fraction of observed cells to hold out")->check(CLI::Range(0.0, 0.999999));
  eval_cmd->add_option("--repeats", repeats, "Holdout repeats")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev_seed, "Seed for holdout masks");
  eval_cmd->add_option("--report", ev_report, "Write per-repeat metrics CSV here");
  add_em_flags(eval_cmd, em);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (fit_cmd->parsed()) {
      const auto data = read_csv(fit_input, load_schema(fit_schema));
      auto result = fit(data, em.config());
      print_fit(out, result);
      save_model(make_stored_model(std::move(result), data), sigma_out, marginals_out);
      return kSuccess;
    }

    if (imp_cmd->parsed()) {
      StoredModel model;
      MixedDataMatrix data;
      if (!imp_sigma.empty()) {
        model = load_model(imp_sigma, imp_marginals);
        data = read_csv(imp_input, schema_for(model));
        if (data.column_names() != model.column_names)
          throw InvalidArgument("input columns do not match the saved model");
      } else {
        data = read_csv(imp_input, load_schema(imp_schema));
        model = make_stored_model(fit(data, em.config()), data);
        print_fit(out, model.fit);
      }
      const auto config = em.impute_config(gibbs_sweeps);
      if (multiple <= 1) {
        const auto result = impute(data, model.fit, config);
        write_csv(result.completed, imp_output);
        if (!result.unobserved_rows.empty())
          out << "warning: " << result.unobserved_rows.size() << " rows had no observed cells\n";
      } else {
        const auto result = impute_multiple(data, model.fit, multiple, imp_seed, config);
        for (std::size_t k = 0; k < result.draws.size(); ++k)
          write_csv(result.draws[k].completed, draw_path(imp_output, static_cast<int>(k) + 1));
      }
      return kSuccess;
    }

    if (sim_cmd->parsed()) {
      const auto spec = SyntheticSpec::mixed_thirds(sim_n, sim_p, sim_missing, sim_seed, sim_levels);
      const auto sigma = random_correlation(sim_p, mix_seed(sim_seed, 0x5167));
      const auto data = generate(sigma, spec);
      const auto masked = mask_mcar(data.complete, sim_missing, mix_seed(sim_seed, 0x3a5c));
      const fs::path dir(sim_dir);
      fs::create_directories(dir);
      write_csv(data.complete, dir / "complete.csv");
      write_csv(masked, dir / "masked.csv");
      write_text_file(dir / "sigma_true.csv", format_sigma_csv(sigma, data.complete.column_names()));
      std::string cut = "column,cutoffs\n";
      for (std::size_t j = 0; j < data.cutoffs.size(); ++j) {
        std::string joined;
        for (double c : data.cutoffs[j]) joined += (joined.empty() ? "" : " ") + format_double(c);
        cut += data.complete.column_name(static_cast<Eigen::Index>(j)) + "," + joined + "\n";
      }
      write_text_file(dir / "cutoffs_true.csv", cut);
      out << "wrote complete.csv, masked.csv, sigma_true.csv, cutoffs_true.csv to " << dir.string() << "\n";
      return kSuccess;
    }

    if (eval_cmd->parsed()) {
      std::vector<MetricReport> reports;
      if (!ev_input.empty()) {
        const auto data = read_csv(ev_input, load_schema(ev_schema));
        HoldoutOptions options;
        options.em = em.config();
        options.impute = em.impute_config(gibbs_sweeps);
        reports = holdout_experiment(data, holdout, repeats, ev_seed, options);
      } else {
        if (ev_truth.empty() || ev_masked.empty())
          throw InvalidArgument("evaluate needs --input, or --truth with --masked");
        const auto truth = read_csv(ev_truth, load_schema(ev_schema));
        const auto schema = schema_for(truth);
        const auto masked = read_csv(ev_masked, schema);
        if (masked.rows() != truth.rows() || masked.column_names() != truth.column_names())
          throw InvalidArgument("--masked does not match --truth in shape or columns");
        MaskMatrix test(truth.rows(), truth.cols());
        for (Eigen::Index i = 0; i < truth.rows(); ++i)
          for (Eigen::Index j = 0; j < truth.cols(); ++j) test(i, j) = truth.observed(i, j) && !masked.observed(i, j);

        MixedDataMatrix completed;
        std::optional<CorrelationMatrix> estimate;
        int iterations = 0;
        if (!ev_imputed.empty()) {
          completed = read_csv(ev_imputed, schema);
          if (completed.rows() != truth.rows() || completed.column_names() != truth.column_names())
            throw InvalidArgument("--imputed does not match --truth in shape or columns");
        } else {
          const auto model = fit(masked, em.config());
          iterations = model.iterations;
          estimate = model.sigma;
          completed = impute(masked, model, em.impute_config(gibbs_sweeps)).completed;
        }
        auto report = score_imputation(truth, masked, completed, test);
        report.iterations = iterations;
        if (!ev_sigma.empty()) estimate = parse_sigma_csv(read_text_file(ev_sigma));
        if (!ev_sigma_truth.empty()) {
          if (!estimate) throw InvalidArgument("--sigma-truth needs --sigma or an inline fit");
          report.corr_rel_error = corr_rel_error(*estimate, parse_sigma_csv(read_text_file(ev_sigma_truth)));
        }
        for (const auto& w : report.warnings) err << "warning: " << w << "\n";
        reports.push_back(std::move(report));
      }
      const auto summary = summarize(reports);
      out << format_summary_table(summary);
      if (!ev_report.empty()) write_text_file(ev_report, format_reports_csv(reports));
      return summary.failures == reports.size() ? kNumericalFailure : kSuccess;
    }
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace copula::cli
