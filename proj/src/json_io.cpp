#include "sofsyn/json_io.hpp"

#include "sofsyn/system.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace sofsyn {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void put_scalar(ordered_json& j, const char* key, double value) {
  if (std::isfinite(value)) j[key] = value;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

}  // namespace

std::string synthesis_result_to_json(const SynthesisResult& result) {
  ordered_json j;
  j["status"] = to_string(result.status);
  j["method"] = to_string(result.method);
  put_scalar(j, "mu", result.mu);
  put_scalar(j, "alpha_star", result.alpha_star);
  put_scalar(j, "eps1_star", result.eps1_star);
  put_scalar(j, "eps2", result.eps2);
  put_scalar(j, "gamma_star", result.gamma_star);
  put_scalar(j, "omega_star", result.omega_star);
  if (result.K.size() > 0) j["K"] = matrix_json(result.K);
  if (result.P.dim() > 0) j["P"] = matrix_json(result.P.dense());
  if (result.G.size() > 0) j["G"] = matrix_json(result.G);
  if (result.Q.size() > 0) j["Q"] = matrix_json(result.Q);
  if (result.Gamma_star.size() > 0) j["Gamma_star"] = matrix_json(result.Gamma_star);
  if (result.Acal.size() > 0) j["Acal"] = matrix_json(result.Acal);
  j["gain_recovery"] = {{"mode", to_string(result.gain_recovery)},
                        {"residual", result.gain_residual}};
  if (result.method == Method::Theorem1)
    j["rank_condition_holds"] = result.rank_condition_holds;
  ordered_json diag;
  diag["objective_value"] = result.objective_value;
  diag["iterations"] = result.iterations;
  if (result.block_slacks.size() > 0) {
    ordered_json slacks = ordered_json::array();
    for (Eigen::Index i = 0; i < result.block_slacks.size(); ++i)
      slacks.push_back(result.block_slacks[i]);
    diag["block_slacks"] = slacks;
  }
  diag["equality_residual"] = result.equality_residual;
  diag["q_min_singular_value"] = result.q_min_singular_value;
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

void save_synthesis_result(const SynthesisResult& result, const std::string& path) {
  write_text(synthesis_result_to_json(result), path);
}

std::string robustness_report_to_json(const RobustnessReport& report) {
  ordered_json j;
  j["gamma_actual"] = report.gamma_actual;
  j["gamma_star"] = report.gamma_star;
  j["normwise_margin"] = report.normwise_margin;
  if (report.Gamma_actual) j["Gamma_actual"] = matrix_json(*report.Gamma_actual);
  if (report.Gamma_star) j["Gamma_star"] = matrix_json(*report.Gamma_star);
  if (report.elementwise_lower.size() > 0) {
    j["elementwise_lower"] = matrix_json(report.elementwise_lower);
    j["elementwise_upper"] = matrix_json(report.elementwise_upper);
  }
  return j.dump(2) + "\n";
}

void save_robustness_report(const RobustnessReport& report, const std::string& path) {
  write_text(robustness_report_to_json(report), path);
}

Matrix load_gain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemError(SystemErrorCode::ParseError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SystemError(SystemErrorCode::ParseError, e.what());
  }
  if (!j.contains("K") || !j["K"].is_array())
    throw SystemError(SystemErrorCode::SchemaViolation,
                      path + ": no gain matrix K (was the synthesis feasible?)");
  const auto& rows = j["K"];
  const int r = static_cast<int>(rows.size());
  if (r == 0)
    throw SystemError(SystemErrorCode::SchemaViolation, "K: empty matrix");
  const int c = static_cast<int>(rows[0].size());
  Matrix k(r, c);
  for (int i = 0; i < r; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != c)
      throw SystemError(SystemErrorCode::SchemaViolation, "K: ragged rows");
    for (int jcol = 0; jcol < c; ++jcol) {
      if (!rows[i][jcol].is_number())
        throw SystemError(SystemErrorCode::SchemaViolation, "K: non-numeric entry");
      k(i, jcol) = rows[i][jcol].get<double>();
    }
  }
  return k;
}

}  // namespace sofsyn
