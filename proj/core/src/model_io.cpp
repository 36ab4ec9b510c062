#include "pfqr/error.hpp"
#include "pfqr/model.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace pfqr {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "pfqr-model";
constexpr int kVersion = 1;

template <class Vec>
json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const MatrixXd& mat) {
  json out = json::array();
  for (Index r = 0; r < mat.rows(); ++r) out.push_back(vector_to_json(RowVectorXd(mat.row(r))));
  return out;
}

VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string("model field '") + what + "' must be an array");
  VectorXd out(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, std::string("model field '") + what + "' must hold numbers");
    out(static_cast<Index>(i)) = j[i].get<double>();
  }
  return out;
}

MatrixXd matrix_from_json(const json& j, Index cols, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string("model field '") + what + "' must be an array");
  MatrixXd out(static_cast<Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const VectorXd row = vector_from_json(j[r], what);
    if (row.size() != cols) {
      throw Error(ErrorCode::ParseError, std::string("model field '") + what + "' has a row of the wrong length");
    }
    out.row(static_cast<Index>(r)) = row.transpose();
  }
  return out;
}

const json& field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw Error(ErrorCode::ParseError, std::string("model is missing field '") + name + "'");
  return *it;
}

json loss_to_json(const CheckLossSpec& loss) {
  const char* kind = loss.kind() == CheckLossSpec::Kind::LS ? "ls" : loss.kind() == CheckLossSpec::Kind::QR ? "qr" : "cqr";
  return json{{"kind", kind}, {"levels", loss.levels()}};
}

CheckLossSpec loss_from_json(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  const auto levels = field(j, "levels").get<std::vector<double>>();
  if (kind == "ls") return CheckLossSpec::least_squares();
  if (kind == "qr" && levels.size() == 1) return CheckLossSpec::quantile(levels.front());
  if (kind == "cqr") return CheckLossSpec::composite(levels);
  throw Error(ErrorCode::ParseError, "unknown loss '" + kind + "'");
}

}  // namespace

void save_model(const ModelFit& fit, std::ostream& out) {
  const ExtractionResult& ex = fit.extraction;
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["loss"] = loss_to_json(fit.loss);
  doc["grid_size"] = fit.grid().size();
  doc["intercepts"] = vector_to_json(fit.intercepts);
  doc["scalar_coefs"] = vector_to_json(fit.scalar_coefs);
  doc["basis_coefs"] = vector_to_json(fit.basis_coefs);
  doc["gamma_hat"] = vector_to_json(fit.gamma_hat);
  doc["functional_offset"] = fit.functional_offset;
  doc["extraction"] = {
      {"method", std::string(to_string(ex.method))},
      {"mean", vector_to_json(ex.transform.mean)},
      {"scale", vector_to_json(ex.transform.scale)},
      {"directions", matrix_to_json(ex.directions.functions)},
      {"deflation_intercepts", matrix_to_json(ex.deflation_intercepts)},
      {"deflation_slopes", matrix_to_json(ex.deflation_slopes)},
      {"weights", matrix_to_json(ex.weights)},
      {"score_offsets", vector_to_json(ex.score_offsets)},
      {"exhausted", ex.exhausted},
      {"rank_truncated", ex.rank_truncated},
  };
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed to write model");
}

ModelFit load_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (field(doc, "format") != kFormat) throw Error(ErrorCode::ParseError, "not a pfqr model document");
    if (field(doc, "version") != kVersion) throw Error(ErrorCode::ParseError, "unsupported model version");
    const Index m = field(doc, "grid_size").get<Index>();
    const Grid grid = Grid::uniform(m);
    const json& ej = field(doc, "extraction");

    ModelFit fit;
    fit.loss = loss_from_json(field(doc, "loss"));
    fit.intercepts = vector_from_json(field(doc, "intercepts"), "intercepts");
    fit.scalar_coefs = vector_from_json(field(doc, "scalar_coefs"), "scalar_coefs");
    fit.basis_coefs = vector_from_json(field(doc, "basis_coefs"), "basis_coefs");
    fit.gamma_hat = vector_from_json(field(doc, "gamma_hat"), "gamma_hat");
    fit.functional_offset = field(doc, "functional_offset").get<double>();

    ExtractionResult& ex = fit.extraction;
    ex.method = basis_method_from_string(field(ej, "method").get<std::string>());
    ex.transform.mean = vector_from_json(field(ej, "mean"), "mean").transpose();
    ex.transform.scale = vector_from_json(field(ej, "scale"), "scale").transpose();
    ex.directions.grid = grid;
    ex.directions.method = ex.method;
    ex.directions.normalization = InnerProduct::L2Weighted;
    ex.directions.functions = matrix_from_json(field(ej, "directions"), m, "directions");
    ex.deflation_intercepts = matrix_from_json(field(ej, "deflation_intercepts"), m, "deflation_intercepts");
    ex.deflation_slopes = matrix_from_json(field(ej, "deflation_slopes"), m, "deflation_slopes");
    ex.weights = matrix_from_json(field(ej, "weights"), m, "weights");
    ex.score_offsets = vector_from_json(field(ej, "score_offsets"), "score_offsets");
    ex.exhausted = field(ej, "exhausted").get<bool>();
    ex.rank_truncated = field(ej, "rank_truncated").get<bool>();
    ex.scores.method = ex.method;

    const Index k = ex.directions.size();
    if (ex.transform.mean.size() != m || ex.transform.scale.size() != m || fit.gamma_hat.size() != m ||
        ex.deflation_intercepts.rows() != k || ex.deflation_slopes.rows() != k || ex.weights.rows() != k ||
        ex.score_offsets.size() != k || fit.basis_coefs.size() != k) {
      throw Error(ErrorCode::ParseError, "model fields have inconsistent sizes");
    }
    const Index levels = fit.loss.kind() == CheckLossSpec::Kind::CQR ? static_cast<Index>(fit.loss.levels().size()) : 1;
    if (fit.intercepts.size() != levels) throw Error(ErrorCode::ParseError, "model has the wrong number of intercepts");
    return fit;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, std::string("invalid model document: ") + e.what());
  }
}

}  // namespace pfqr
