#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dipca/core.h"
#include "dipca/deflate.h"

namespace dipca {

// Numeric CSV: one row per sample, one column per feature, '.' decimal
// point. With `header` the first line is skipped. Blank lines are ignored.
// Malformed input throws Error(kParse) naming `source` and the line number.
Eigen::MatrixXd parse_csv(std::istream& in, bool header,
                          const std::string& source = "<input>");
Eigen::MatrixXd read_csv(const std::filesystem::path& path, bool header);

// Values printed with 17 significant digits.
std::string to_csv(const Eigen::MatrixXd& values,
                   const std::vector<std::string>& header = {});

// Writes to a sibling temporary file and renames it over `path`, so a
// failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

// Single-component model as written by `fit`.
struct FitModel {
  Algorithm algorithm = Algorithm::kI;
  int m = 0;
  int n = 0;
  int s = 0;
  bool centered = false;
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double residual_inf = 0.0;
  bool converged = false;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::vector<double> lambda_history;
  std::string status;
};

FitModel fit_model_from_report(const SolveReport& report,
                               const TimeSeriesData& data);
nlohmann::json to_json(const FitModel& model);
FitModel fit_model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const DiPCAModel& model);
DiPCAModel dipca_model_from_json(const nlohmann::json& doc);

// Serializes with every double at 17 significant digits.
std::string dump_json(const nlohmann::json& doc);

Algorithm parse_algorithm(const std::string& text);

}  // namespace dipca
