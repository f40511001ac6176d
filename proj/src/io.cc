#include "dipca/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dipca/error.h"

namespace dipca {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return text.substr(first, last - first + 1);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j, const char* field) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kParse, std::string("field '") + field +
                                       "' must be an array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::kParse, std::string("field '") + field +
                                         "' must be an array of numbers");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

template <typename T>
T field(const json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw Error(ErrorCode::kParse,
                std::string("model JSON is missing field '") + name + "'");
  }
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParse,
                std::string("model JSON field '") + name + "' has the wrong type");
  }
}

Eigen::VectorXd vector_field(const json& doc, const char* name) {
  return vector_from_json(field<json>(doc, name), name);
}

void dump_into(const json& doc, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (doc.type()) {
    case json::value_t::number_float:
      if (std::isfinite(doc.get<double>())) {
        out += fmt17(doc.get<double>());
      } else {
        out += "null";
      }
      return;
    case json::value_t::array: {
      if (doc.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(doc.begin(), doc.end(),
                                    [](const json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : doc) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += "\n" + pad;
        dump_into(e, out, indent, depth + 1);
        first = false;
      }
      if (!flat) out += "\n" + close_pad;
      out += ']';
      return;
    }
    case json::value_t::object: {
      if (doc.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : doc.items()) {
        if (!first) out += ',';
        out += "\n" + pad + json(key).dump() + ": ";
        dump_into(value, out, indent, depth + 1);
        first = false;
      }
      out += "\n" + close_pad + '}';
      return;
    }
    default:
      out += doc.dump();
  }
}

}  // namespace

Eigen::MatrixXd parse_csv(std::istream& in, bool header,
                          const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double value = 0.0;
      const auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::kParse,
                    source + ":" + std::to_string(line_no) + ": field " +
                        std::to_string(row.size() + 1) + " ('" +
                        std::string(cell) + "') is not a number");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kParse,
                  source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " fields, found " +
                      std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kParse, source + ": no data rows");
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  return parse_csv(in, header, path.string());
}

std::string to_csv(const Eigen::MatrixXd& values,
                   const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out += ',';
    out += header[j];
  }
  if (!header.empty()) out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out += ',';
      out += fmt17(values(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    }
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move output into '" + path.string() + "'");
  }
}

FitModel fit_model_from_report(const SolveReport& report,
                               const TimeSeriesData& data) {
  FitModel model;
  const SolverState& st = report.converged ? report.state : report.best;
  model.algorithm = report.algorithm;
  model.m = data.features();
  model.n = data.samples();
  model.s = data.lags();
  model.centered = data.centered();
  model.w = st.w;
  model.beta = st.beta;
  model.lambda = st.lambda;
  model.residual_inf = st.residual_inf;
  model.converged = report.converged;
  model.iterations = report.state.iter;
  model.wall_time_s = report.wall_time_s;
  model.lambda_history = report.lambda_history;
  model.status = to_string(report.status);
  return model;
}

json to_json(const FitModel& model) {
  return json{{"algorithm", to_string(model.algorithm)},
              {"m", model.m},
              {"n", model.n},
              {"s", model.s},
              {"centered", model.centered},
              {"w", vector_json(model.w)},
              {"beta", vector_json(model.beta)},
              {"lambda", model.lambda},
              {"residual_inf", model.residual_inf},
              {"converged", model.converged},
              {"status", model.status},
              {"iterations", model.iterations},
              {"wall_time_s", model.wall_time_s},
              {"lambda_history", model.lambda_history}};
}

FitModel fit_model_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "model JSON must be an object");
  }
  FitModel model;
  model.algorithm = parse_algorithm(field<std::string>(doc, "algorithm"));
  model.m = field<int>(doc, "m");
  model.n = field<int>(doc, "n");
  model.s = field<int>(doc, "s");
  model.centered = doc.value("centered", false);
  model.w = vector_field(doc, "w");
  model.beta = vector_field(doc, "beta");
  model.lambda = field<double>(doc, "lambda");
  model.residual_inf = field<double>(doc, "residual_inf");
  model.converged = field<bool>(doc, "converged");
  model.iterations = field<int>(doc, "iterations");
  model.wall_time_s = field<double>(doc, "wall_time_s");
  model.lambda_history = field<std::vector<double>>(doc, "lambda_history");
  model.status = doc.value("status", std::string());
  if (model.w.size() != model.m || model.beta.size() != model.s) {
    throw Error(ErrorCode::kParse, "model JSON: w/beta lengths disagree with m/s");
  }
  return model;
}

json to_json(const DiPCAModel& model) {
  json components = json::array();
  for (const auto& c : model.components) {
    components.push_back({{"w", vector_json(c.w)},
                          {"beta", vector_json(c.beta)},
                          {"lambda", c.lambda},
                          {"t", vector_json(c.t)},
                          {"p", vector_json(c.p)},
                          {"converged", c.diagnostics.converged},
                          {"status", to_string(c.diagnostics.status)},
                          {"iterations", c.diagnostics.iterations},
                          {"residual_inf", c.diagnostics.residual_inf},
                          {"wall_time_s", c.diagnostics.wall_time_s}});
  }
  json doc = {{"algorithm", to_string(model.algorithm)},
              {"m", model.m},
              {"n", model.n},
              {"s", model.s},
              {"centered", model.centered},
              {"column_means", vector_json(model.column_means)},
              {"components", std::move(components)}};
  if (!model.stop_reason.empty()) doc["stop_reason"] = model.stop_reason;
  return doc;
}

DiPCAModel dipca_model_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "model JSON must be an object");
  }
  DiPCAModel model;
  model.algorithm = parse_algorithm(field<std::string>(doc, "algorithm"));
  model.m = field<int>(doc, "m");
  model.n = field<int>(doc, "n");
  model.s = field<int>(doc, "s");
  model.centered = field<bool>(doc, "centered");
  model.column_means = vector_field(doc, "column_means");
  if (model.column_means.size() != model.m) {
    throw Error(ErrorCode::kParse, "model JSON: column_means length is not m");
  }
  model.stop_reason = doc.value("stop_reason", std::string());
  for (const auto& c : field<json>(doc, "components")) {
    LatentComponent comp;
    comp.w = vector_field(c, "w");
    comp.beta = vector_field(c, "beta");
    comp.t = vector_field(c, "t");
    comp.p = vector_field(c, "p");
    if (comp.w.size() != model.m || comp.p.size() != model.m ||
        comp.beta.size() != model.s || comp.t.size() != model.n + model.s) {
      throw Error(ErrorCode::kParse,
                  "model JSON: component dimensions disagree with m/n/s");
    }
    comp.lambda = field<double>(c, "lambda");
    comp.diagnostics.converged = field<bool>(c, "converged");
    comp.diagnostics.iterations = field<int>(c, "iterations");
    comp.diagnostics.residual_inf = field<double>(c, "residual_inf");
    comp.diagnostics.wall_time_s = field<double>(c, "wall_time_s");
    model.components.push_back(std::move(comp));
  }
  return model;
}

std::string dump_json(const json& doc) {
  std::string out;
  dump_into(doc, out, 2, 0);
  out += '\n';
  return out;
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "1" || text == "I" || text == "i") return Algorithm::kI;
  if (text == "2" || text == "II" || text == "ii") return Algorithm::kII;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown algorithm '" + text + "' (expected 1 or 2)");
}

}  // namespace dipca
