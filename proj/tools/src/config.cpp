#include "pfqr/csv.hpp"
#include "pfqr/error.hpp"
#include "pfqr_cli/cli.hpp"

#include <json.hpp>

#include <set>

namespace pfqr::cli {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

json parse_document(std::string_view text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) schema_error("config must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    schema_error(std::string("config is not valid JSON: ") + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) schema_error(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    schema_error(where + ": key '" + key + "' is missing or has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

template <class T, class Fn>
std::vector<T> parse_list(const json& obj, const std::string& key, Fn convert, std::vector<T> fallback,
                          const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto names = get<std::vector<std::string>>(obj, key, where);
  std::vector<T> out;
  for (const auto& name : names) out.push_back(convert(name));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

CqrPrediction cqr_prediction_from_string(const std::string& s) {
  if (s == "median") return CqrPrediction::MedianLevel;
  if (s == "mean") return CqrPrediction::MeanOfLevels;
  schema_error("cqr_prediction must be 'median' or 'mean'");
}

StopRule stop_rule_from_string(const std::string& s) {
  if (s == "fixed") return StopRule::FixedK;
  if (s == "cv") return StopRule::CrossValidation;
  if (s == "bic") return StopRule::BIC;
  schema_error("stop_rule must be 'fixed', 'cv' or 'bic'");
}

}  // namespace

SimulateSettings parse_simulate_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_document(json_text);
  const std::string where = "simulate config";
  check_keys(doc,
             {"design", "sample_sizes", "error_laws", "methods", "k", "replications", "tau", "cqr_levels", "seed",
              "threads", "mse_mode", "cqr_prediction", "integrated_mise", "column_scaling", "plots", "sim2"},
             where);
  SimulateSettings settings;
  BenchmarkConfig& c = settings.benchmark;
  const auto design = get<std::string>(doc, "design", where);
  if (design == "sim1") {
    c.design = DesignKind::Sim1;
  } else if (design == "sim2") {
    c.design = DesignKind::Sim2;
  } else {
    schema_error(where + ": design must be 'sim1' or 'sim2'");
  }
  c.sample_sizes = get_or<std::vector<Index>>(doc, "sample_sizes", c.sample_sizes, where);
  c.laws = parse_list<ErrorLaw>(doc, "error_laws", [](const std::string& s) { return error_law_from_string(s); },
                                c.laws, where);
  c.methods = parse_list<MethodId>(doc, "methods", [](const std::string& s) { return method_from_string(s); },
                                   c.methods, where);
  c.ks = get_or<std::vector<Index>>(doc, "k", c.ks, where);
  c.replications = get_or<int>(doc, "replications", c.replications, where);
  c.tau = get_or<double>(doc, "tau", c.tau, where);
  c.cqr_levels = get_or<int>(doc, "cqr_levels", c.cqr_levels, where);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed, where);
  c.threads = get_or<int>(doc, "threads", c.threads, where);
  c.mse_mode = mse_mode_from_string(get_or<std::string>(doc, "mse_mode", "both", where));
  c.cqr_prediction = cqr_prediction_from_string(get_or<std::string>(doc, "cqr_prediction", "median", where));
  c.integrated_mise = get_or<bool>(doc, "integrated_mise", c.integrated_mise, where);
  c.scaling = column_scaling_from_string(get_or<std::string>(doc, "column_scaling", "center", where));
  settings.plots = get_or<bool>(doc, "plots", true, where);

  if (doc.contains("sim2")) {
    const json& s2 = doc.at("sim2");
    const std::string w2 = where + " (sim2)";
    if (!s2.is_object()) schema_error(w2 + ": must be an object");
    check_keys(s2, {"cases", "source_csv", "source_size", "grid_size", "noise_factor"}, w2);
    c.sim2_cases = parse_list<Sim2Case>(s2, "cases", [](const std::string& s) { return sim2_case_from_string(s); },
                                        c.sim2_cases, w2);
    c.sim2_source_size = get_or<Index>(s2, "source_size", c.sim2_source_size, w2);
    c.sim2_grid = get_or<Index>(s2, "grid_size", c.sim2_grid, w2);
    c.noise_factor = get_or<double>(s2, "noise_factor", c.noise_factor, w2);
    if (s2.contains("source_csv")) {
      CurveFile file = read_curves_csv(resolve(base_dir, get<std::string>(s2, "source_csv", w2)));
      c.sim2_source = FunctionalSample(std::move(file.grid), std::move(file.curves));
    }
  }
  c.validate();
  return settings;
}

FitTask parse_fit_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_document(json_text);
  const std::string where = "fit config";
  check_keys(doc,
             {"curves", "scalars", "responses", "responses_column", "method", "loss", "tau", "levels", "cqr_levels",
              "k", "stop_rule", "cv_folds", "column_scaling", "scalars_as_adjusters", "seed", "threads",
              "cqr_prediction"},
             where);
  FitTask task;
  task.curves = resolve(base_dir, get<std::string>(doc, "curves", where));
  task.responses = resolve(base_dir, get<std::string>(doc, "responses", where));
  if (doc.contains("scalars")) task.scalars = resolve(base_dir, get<std::string>(doc, "scalars", where));
  task.responses_column = get_or<std::string>(doc, "responses_column", "", where);

  ExtractionConfig& ec = task.extraction;
  ec.method = basis_method_from_string(get<std::string>(doc, "method", where));
  const std::string default_loss =
      ec.method == BasisMethod::PQR ? "qr" : ec.method == BasisMethod::PCQR ? "cqr" : "ls";
  const auto loss = get_or<std::string>(doc, "loss", default_loss, where);
  const double tau = get_or<double>(doc, "tau", 0.5, where);
  if (loss == "ls") {
    task.loss = CheckLossSpec::least_squares();
  } else if (loss == "qr") {
    task.loss = CheckLossSpec::quantile(tau);
  } else if (loss == "cqr") {
    task.loss = doc.contains("levels") ? CheckLossSpec::composite(get<std::vector<double>>(doc, "levels", where))
                                       : CheckLossSpec::composite_uniform(get_or<int>(doc, "cqr_levels", 9, where));
  } else {
    schema_error(where + ": loss must be 'ls', 'qr' or 'cqr'");
  }
  // The extraction covariance follows the basis family; the model loss is free.
  if (ec.method == BasisMethod::PQR) {
    ec.loss = task.loss.kind() == CheckLossSpec::Kind::QR ? task.loss : CheckLossSpec::quantile(tau);
  } else if (ec.method == BasisMethod::PCQR) {
    ec.loss = task.loss.kind() == CheckLossSpec::Kind::CQR
                  ? task.loss
                  : CheckLossSpec::composite_uniform(get_or<int>(doc, "cqr_levels", 9, where));
  } else {
    ec.loss = task.loss;
  }
  ec.k_max = get<Index>(doc, "k", where);
  ec.stop_rule = stop_rule_from_string(get_or<std::string>(doc, "stop_rule", "fixed", where));
  ec.cv_folds = get_or<int>(doc, "cv_folds", ec.cv_folds, where);
  ec.scaling = column_scaling_from_string(get_or<std::string>(doc, "column_scaling", "standardize", where));
  ec.scalars_as_adjusters = get_or<bool>(doc, "scalars_as_adjusters", true, where);
  ec.seed = get_or<std::uint64_t>(doc, "seed", 0, where);
  ec.threads = get_or<int>(doc, "threads", 1, where);
  task.cqr_prediction = cqr_prediction_from_string(get_or<std::string>(doc, "cqr_prediction", "median", where));
  return task;
}

}  // namespace pfqr::cli
