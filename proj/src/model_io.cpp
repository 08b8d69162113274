#include "coltkf/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coltkf/censored_moments.hpp"
#include "coltkf/errors.hpp"
#include "coltkf/harness.hpp"

namespace coltkf {
namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

Eigen::MatrixXd parse_matrix(const json& j, Eigen::Index n, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("model key '" + key + "' must be a non-empty array");
  Eigen::MatrixXd M(n, n);
  if (j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != n)
      throw std::invalid_argument("model key '" + key + "' has wrong row count");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = j[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != n)
        throw std::invalid_argument("model key '" + key + "' has a ragged row");
      for (Eigen::Index c = 0; c < n; ++c) M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  } else {
    if (static_cast<Eigen::Index>(j.size()) != n * n)
      throw std::invalid_argument("model key '" + key + "' has wrong length for row-major data");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < n; ++c)
        M(i, c) = j[static_cast<std::size_t>(i * n + c)].get<double>();
  }
  return M;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::invalid_argument("model key '" + key + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

CensorBand parse_band(const json& j) {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  if (j.contains("lower") && !j["lower"].is_null()) lower = j["lower"].get<double>();
  if (j.contains("upper") && !j["upper"].is_null()) upper = j["upper"].get<double>();
  return CensorBand(lower, upper);
}

json band_to_json(const CensorBand& band) {
  json j;
  j["lower"] = band.lower_finite() ? json(band.lower) : json(nullptr);
  j["upper"] = band.upper_finite() ? json(band.upper) : json(nullptr);
  return j;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

std::string format_full(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

ColouredStateSpace load_model(const std::string& path) {
  json j = read_json_file(path);
  for (const char* key : {"A", "C", "H", "Q", "r2", "g", "x0", "P0"})
    if (!j.contains(key)) throw std::invalid_argument("model file missing key '" + std::string(key) + "'");
  Eigen::VectorXd x0 = parse_vector(j["x0"], "x0");
  const Eigen::Index n = x0.size();
  Eigen::VectorXd h = parse_vector(j["H"], "H");
  if (h.size() != n) throw std::invalid_argument("model key 'H' has wrong length");
  CensorBand band = j.contains("band") && !j["band"].is_null() ? parse_band(j["band"]) : CensorBand();
  return ColouredStateSpace(parse_matrix(j["A"], n, "A"), parse_matrix(j["C"], n, "C"),
                            h.transpose(), parse_matrix(j["Q"], n, "Q"), j["r2"].get<double>(),
                            j["g"].get<double>(), band, std::move(x0), parse_matrix(j["P0"], n, "P0"));
}

void save_model(const std::string& path, const ColouredStateSpace& model) {
  json j;
  j["A"] = matrix_to_json(model.A);
  j["C"] = matrix_to_json(model.C);
  j["H"] = vector_to_json(model.H.transpose());
  j["Q"] = matrix_to_json(model.Q);
  j["r2"] = model.r2;
  j["g"] = model.g;
  j["band"] = band_to_json(model.band);
  j["x0"] = vector_to_json(model.x0);
  j["P0"] = matrix_to_json(model.P0);
  write_text_file(path, j.dump(2) + "\n");
}

GaussianSpec load_gaussian(const std::string& path) {
  json j = read_json_file(path);
  const bool direct = j.contains("mean") && j.contains("cov");
  const char* mean_key = direct ? "mean" : "x0";
  const char* cov_key = direct ? "cov" : "P0";
  if (!j.contains(mean_key) || !j.contains(cov_key))
    throw std::invalid_argument("gaussian file needs mean/cov (or x0/P0) keys");
  Eigen::VectorXd mean = parse_vector(j[mean_key], mean_key);
  return GaussianSpec(mean, parse_matrix(j[cov_key], mean.size(), cov_key));
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  const Eigen::Index n = traj.states.cols();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << ",y_star,y\n";
  for (Eigen::Index t = 0; t < traj.steps(); ++t) {
    out << (t + 1);
    for (Eigen::Index i = 0; i < n; ++i) out << "," << format_full(traj.states(t, i));
    out << "," << format_full(traj.latent[t]) << "," << format_full(traj.observed[t]) << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "t" || header.back() != "y" ||
      header[header.size() - 2] != "y_star")
    throw std::invalid_argument(path + ": expected header t,x1..xn,y_star,y");
  const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 3;

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::invalid_argument(path + ": ragged CSV row");
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(std::stod(fields[i]));
    rows.push_back(std::move(row));
  }
  Trajectory traj;
  const Eigen::Index steps = static_cast<Eigen::Index>(rows.size());
  traj.states.resize(steps, n);
  traj.latent.resize(steps);
  traj.observed.resize(steps);
  traj.process_noise = Eigen::MatrixXd::Zero(steps, n);  // not stored in the CSV
  traj.meas_noise = Eigen::VectorXd::Zero(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) traj.states(t, i) = rows[t][i];
    traj.latent[t] = rows[t][n];
    traj.observed[t] = rows[t][n + 1];
  }
  return traj;
}

void write_trace_csv(const std::string& path, const FilterTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  if (trace.steps.empty())
    throw std::invalid_argument("write_trace_csv: trace has no recorded steps");
  const Eigen::Index m = trace.steps.front().post_mean.size();
  out << "t";
  for (Eigen::Index i = 0; i < m; ++i) out << ",zhat_" << (i + 1);
  out << ",loglik_step,mean_censored,var_censored,uncensored_prob\n";
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const FilterStep& step = trace.steps[t];
    out << (t + 1);
    for (Eigen::Index i = 0; i < m; ++i) out << "," << format_full(step.post_mean[i]);
    out << "," << format_full(step.log_lik) << "," << format_full(step.pm.mean_censored) << ","
        << format_full(step.pm.var_censored) << "," << format_full(step.pm.uncensored_prob)
        << "\n";
  }
}

std::string fit_to_json(const FitReport& report) {
  json j;
  j["c_diag"] = vector_to_json(report.params.c_diag);
  j["g"] = report.params.g;
  j["loglik"] = report.log_likelihood;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  return j.dump(2) + "\n";
}

void write_fit_json(const std::string& path, const FitReport& report) {
  write_text_file(path, fit_to_json(report));
}

ArParams load_fit_params(const std::string& path) {
  json j = read_json_file(path);
  if (!j.contains("c_diag") || !j.contains("g"))
    throw std::invalid_argument(path + ": fit file needs c_diag and g");
  ArParams params;
  params.c_diag = parse_vector(j["c_diag"], "c_diag");
  params.g = j["g"].get<double>();
  return params;
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["experiment"] = report.experiment_id;
  j["runs"] = report.runs;
  j["seed"] = report.seed;
  json table;
  for (const auto& [name, stats] : report.table) {
    json entry;
    entry["mean"] = vector_to_json(stats.mean);
    entry["std"] = vector_to_json(stats.stddev);
    table[name] = std::move(entry);
  }
  j["table"] = std::move(table);
  json excluded = json::array();
  for (const auto& failure : report.excluded_runs) {
    json e;
    e["run"] = failure.run;
    e["seed"] = failure.seed;
    e["reason"] = failure.reason;
    excluded.push_back(std::move(e));
  }
  j["excluded_runs"] = std::move(excluded);
  return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const ExperimentReport& report) {
  write_text_file(path, report_to_json(report));
}

namespace {

json summary_json(const CensoredSummary& summary) {
  json j;
  j["mean"] = vector_to_json(summary.mean);
  j["cov"] = matrix_to_json(summary.cov);
  j["skewness"] = vector_to_json(summary.skewness);
  j["uncensored_prob"] = summary.uncensored_prob;
  return j;
}

}  // namespace

std::string summary_to_json(const CensoredSummary& summary) {
  return summary_json(summary).dump(2) + "\n";
}

std::string moments_comparison_to_json(const CensoredSummary& closed,
                                       const McCensoredSummary& mc) {
  json j;
  j["closed_form"] = summary_json(closed);
  j["monte_carlo"] = summary_json(mc.estimate);
  j["monte_carlo_std_error"] = summary_json(mc.std_error);
  j["reps"] = mc.reps;
  return j.dump(2) + "\n";
}

}  // namespace coltkf
