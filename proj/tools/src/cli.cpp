#include "pfqr_cli/cli.hpp"

#include "pfqr/csv.hpp"
#include "pfqr/error.hpp"
#include "pfqr/report_io.hpp"
#include "pfqr/svg_plot.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>
#include <sstream>

namespace pfqr::cli {

namespace {

namespace fs = std::filesystem;

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
}

int threads_override(int requested) {
  if (const char* env = std::getenv("PFQR_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (*end != '\0' || value < 1) throw Error(ErrorCode::InvalidArgument, "PFQR_THREADS must be a positive integer");
    return static_cast<int>(value);
  }
  return requested;
}

MatrixXd read_numeric_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return csv_numeric(parse_csv(in, path.string()), path.string());
}

VectorXd read_responses(const fs::path& path, const std::string& column) {
  std::istringstream in(read_text_file(path));
  const CsvTable table = parse_csv(in, path.string());
  const MatrixXd values = csv_numeric(table, path.string());
  if (column.empty()) {
    if (values.cols() != 1) {
      throw Error(ErrorCode::ParseError, path.string() + ": several columns present; set responses_column");
    }
    return values.col(0);
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == column) return values.col(static_cast<Index>(c));
  }
  throw Error(ErrorCode::ParseError, path.string() + ": no column named '" + column + "'");
}

std::string level_header(const ModelFit& fit) {
  std::string header = "point";
  if (fit.loss.kind() == CheckLossSpec::Kind::CQR) {
    for (double level : fit.loss.levels()) header += ",q" + format_double(level);
  }
  return header;
}

std::string predictions_csv(const ModelFit& fit, const MatrixXd& levels, CqrPrediction mode) {
  const VectorXd point = collapse_levels(fit, levels, mode);
  std::string out = level_header(fit) + '\n';
  for (Index i = 0; i < levels.rows(); ++i) {
    out += format_double(point(i));
    if (fit.loss.kind() == CheckLossSpec::Kind::CQR) {
      for (Index l = 0; l < levels.cols(); ++l) out += ',' + format_double(levels(i, l));
    }
    out += '\n';
  }
  return out;
}

std::string gamma_csv(const ModelFit& fit) {
  std::string out = "t,gamma_hat\n";
  for (Index j = 0; j < fit.gamma_hat.size(); ++j) {
    out += format_double(fit.grid()[j]) + ',' + format_double(fit.gamma_hat(j)) + '\n';
  }
  return out;
}

void write_report_artifacts(const EvalReport& report, const fs::path& dir, bool plots) {
  write_file_atomic(dir / "report.csv", report_csv(report));
  write_file_atomic(dir / "report.txt", report_table(report));
  if (plots) {
    for (const NamedChart& chart : report_charts(report)) write_file_atomic(dir / chart.file_name, render_svg(chart.chart));
  }
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir, std::optional<int> threads,
                 std::optional<std::uint64_t> seed, bool verbose, std::ostream& out, std::ostream& err) {
  SimulateSettings settings = parse_simulate_config(read_text_file(config_path), config_path.parent_path());
  BenchmarkConfig& config = settings.benchmark;
  if (threads) config.threads = *threads;
  config.threads = threads_override(config.threads);
  if (seed) config.seed = *seed;
  ensure_directory(out_dir);
  ProgressFn progress;
  if (verbose) {
    progress = [&err](std::size_t done, std::size_t total) { err << "block " << done << "/" << total << " done\n"; };
  }
  const EvalReport report = run_benchmark(config, progress);
  write_report_artifacts(report, out_dir, settings.plots);
  write_file_atomic(out_dir / "timing.csv", timing_csv(report));
  out << report_table(report);
  if (report.has_failures()) {
    err << "some cells had failed replications (see the 'failed' column)\n";
    return kPartialFailure;
  }
  return kOk;
}

int cmd_fit(const fs::path& config_path, const fs::path& out_dir, std::ostream& out) {
  const FitTask task = parse_fit_config(read_text_file(config_path), config_path.parent_path());
  CurveFile curves = read_curves_csv(task.curves);
  const VectorXd y = read_responses(task.responses, task.responses_column);
  MatrixXd scalars(curves.curves.rows(), 0);
  if (task.scalars) scalars = read_numeric_file(*task.scalars);
  if (y.size() != curves.curves.rows() || scalars.rows() != curves.curves.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "curves, scalars and responses have different row counts");
  }
  const FunctionalSample sample(curves.grid, std::move(curves.curves), std::move(scalars), y);
  const ExtractionResult extraction = run_extraction(sample, task.extraction);
  const ModelFit fit = fit_model(sample, extraction, task.loss, task.extraction.solver);

  ensure_directory(out_dir);
  std::ostringstream model;
  save_model(fit, model);
  write_file_atomic(out_dir / "model.json", model.str());
  write_file_atomic(out_dir / "gamma_hat.csv", gamma_csv(fit));
  write_file_atomic(out_dir / "fitted.csv", predictions_csv(fit, fit.fitted, task.cqr_prediction));
  out << "fitted " << to_string(extraction.method) << " basis with K=" << extraction.size() << " under "
      << fit.loss.label() << "; mean training loss " << mean_loss(fit.loss, fit.fitted, y) << '\n';
  return kOk;
}

int cmd_predict(const fs::path& model_path, const fs::path& curves_path, const std::optional<fs::path>& scalars_path,
                const fs::path& out_path, const std::string& mode) {
  std::istringstream model_text(read_text_file(model_path));
  const ModelFit fit = load_model(model_text);
  CurveFile curves = read_curves_csv(curves_path);
  MatrixXd scalars(curves.curves.rows(), 0);
  if (scalars_path) scalars = read_numeric_file(*scalars_path);
  if (scalars.rows() != curves.curves.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "curves and scalars have different row counts");
  }
  const FunctionalSample sample(curves.grid, std::move(curves.curves), std::move(scalars));
  const CqrPrediction prediction = mode == "mean" ? CqrPrediction::MeanOfLevels : CqrPrediction::MedianLevel;
  write_file_atomic(out_path, predictions_csv(fit, predict(fit, sample), prediction));
  return kOk;
}

int cmd_report(const fs::path& dir, bool plots, std::ostream& out) {
  const fs::path csv = dir / "report.csv";
  const EvalReport report = parse_report_csv(read_text_file(csv), csv.string());
  write_file_atomic(dir / "report.txt", report_table(report));
  if (plots) {
    for (const NamedChart& chart : report_charts(report)) write_file_atomic(dir / chart.file_name, render_svg(chart.chart));
  }
  out << report_table(report);
  return kOk;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidArgument: return kConfigError;
    case ErrorCode::GridMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonUniformGrid: return kMismatch;
    default: return kFailure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partial functional quantile regression: simulation benchmarks, fitting and prediction", "pfqr"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  std::string sim_config, sim_out;
  std::optional<int> sim_threads;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo benchmark");
  simulate->add_option("--config", sim_config, "Benchmark JSON config")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--threads", sim_threads, "Replication workers (PFQR_THREADS overrides)");
  simulate->add_option("--seed", sim_seed, "Master seed (overrides the config)");

  std::string fit_config, fit_out;
  auto* fit = app.add_subcommand("fit", "Fit a model to CSV data");
  fit->add_option("--config", fit_config, "Fit task JSON config")->required();
  fit->add_option("--out", fit_out, "Output directory")->required();

  std::string pred_model, pred_curves, pred_out, pred_mode = "median";
  std::optional<std::string> pred_scalars;
  auto* predict_cmd = app.add_subcommand("predict", "Predict responses for new curves");
  predict_cmd->add_option("--model", pred_model, "model.json written by fit")->required();
  predict_cmd->add_option("--curves", pred_curves, "Curves CSV")->required();
  predict_cmd->add_option("--scalars", pred_scalars, "Scalar covariates CSV");
  predict_cmd->add_option("--out", pred_out, "Predictions CSV")->required();
  predict_cmd->add_option("--cqr-prediction", pred_mode, "Point prediction of CQR fits")
      ->check(CLI::IsMember({"median", "mean"}));

  std::string report_in;
  bool report_plots = true;
  auto* report = app.add_subcommand("report", "Re-render tables and plots from report.csv");
  report->add_option("--in", report_in, "Directory holding report.csv")->required();
  report->add_flag("!--no-plots", report_plots, "Skip SVG output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_out, sim_threads, sim_seed, verbose, out, err);
    if (*fit) return cmd_fit(fit_config, fit_out, out);
    if (*predict_cmd) {
      std::optional<fs::path> scalars;
      if (pred_scalars) scalars = *pred_scalars;
      return cmd_predict(pred_model, pred_curves, scalars, pred_out, pred_mode);
    }
    if (*report) return cmd_report(report_in, report_plots, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kConfigError;
}

}  // namespace pfqr::cli
