#include "cscorr/json_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cscorr/error.h"

namespace cscorr {

namespace {

void AppendDouble(double v, std::string* out) {
  if (!std::isfinite(v)) {
    *out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  *out += s;
}

void Dump(const Json& j, int indent, int depth, std::string* out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    *out += '\n';
    out->append(static_cast<size_t>(indent) * d, ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        *out += "{}";
        return;
      }
      *out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) *out += ',';
        first = false;
        newline(depth + 1);
        *out += Json(it.key()).dump();
        *out += pretty ? ": " : ":";
        Dump(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      *out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        *out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      *out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) *out += pretty && flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        Dump(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      *out += ']';
      return;
    }
    case Json::value_t::number_float:
      AppendDouble(j.get<double>(), out);
      return;
    default:
      *out += j.dump();
      return;
  }
}

const Json& Require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("missing JSON field '") + key + "'");
  }
  return j.at(key);
}

double NumberOrNan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

Json IntMatrixJson(const Eigen::MatrixXi& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXi IntMatrixFromJson(const Json& j, Eigen::Index rows,
                                  Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorCode::kShape, "integer matrix has the wrong row count");
  }
  Eigen::MatrixXi m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw Error(ErrorCode::kShape, "integer matrix is ragged");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<int>();
  }
  return m;
}

template <typename T>
Json ArrayJson(const T& values) {
  Json a = Json::array();
  for (const auto& v : values) a.push_back(v);
  return a;
}

}  // namespace

std::string DumpJson(const Json& j, int indent) {
  std::string out;
  Dump(j, indent, 0, &out);
  return out;
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIo, "cannot parse '" + path + "': " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

Json ToJson(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json ToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(ToJson(Eigen::VectorXd(m.row(i).transpose())));
  }
  return rows;
}

Eigen::VectorXd VectorFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kShape, "expected a JSON array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = NumberOrNan(j[i]);
  return v;
}

Eigen::MatrixXd MatrixFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kShape, "expected nested arrays");
  const Eigen::Index rows = j.size();
  const Eigen::Index cols = rows > 0 ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw Error(ErrorCode::kShape, "matrix rows differ in length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = NumberOrNan(j[i][k]);
  }
  return m;
}

Json ToJson(const SparseGroundTruth& truth) {
  Json j;
  j["dimension"] = truth.dimension;
  j["support"] = ArrayJson(truth.support);
  j["values"] = ArrayJson(truth.values);
  j["magnitude_std"] = truth.magnitude_std;
  return j;
}

SparseGroundTruth SparseGroundTruthFromJson(const Json& j) {
  SparseGroundTruth t;
  t.dimension = Require(j, "dimension").get<int>();
  t.support = Require(j, "support").get<std::vector<int>>();
  t.values = Require(j, "values").get<std::vector<double>>();
  if (j.contains("magnitude_std")) {
    t.magnitude_std = j["magnitude_std"].get<double>();
  }
  t.Validate();
  return t;
}

Json ToJson(const ProblemInstance& instance) {
  Json j;
  j["format"] = "cscorr.instance";
  j["version"] = 1;
  j["rows"] = instance.rows();
  j["cols"] = instance.cols();
  j["matrix"] = ToJson(instance.matrix);
  if (instance.has_ground_truth) {
    j["signal"] = ToJson(instance.signal);
    j["corruption"] = ToJson(instance.corruption);
  }
  j["dense_noise"] = ToJson(instance.dense_noise);
  j["noise_radius"] = instance.noise_radius;
  j["measurements"] = ToJson(instance.measurements);
  return j;
}

ProblemInstance InstanceFromJson(const Json& j) {
  ProblemInstance inst;
  inst.matrix = MatrixFromJson(Require(j, "matrix"));
  const int m = inst.rows();
  const int n = inst.cols();
  if (j.contains("rows") && j["rows"].get<int>() != m) {
    throw Error(ErrorCode::kShape, "'rows' disagrees with the matrix");
  }
  if (j.contains("cols") && j["cols"].get<int>() != n) {
    throw Error(ErrorCode::kShape, "'cols' disagrees with the matrix");
  }
  inst.measurements = VectorFromJson(Require(j, "measurements"));
  if (inst.measurements.size() != m) {
    throw Error(ErrorCode::kShape, "measurement length differs from rows");
  }
  inst.dense_noise = j.contains("dense_noise")
                         ? VectorFromJson(j["dense_noise"])
                         : Eigen::VectorXd::Zero(m);
  if (inst.dense_noise.size() != m) {
    throw Error(ErrorCode::kShape, "dense_noise length differs from rows");
  }
  inst.noise_radius = j.contains("noise_radius")
                          ? j["noise_radius"].get<double>()
                          : inst.dense_noise.norm();
  inst.has_ground_truth = j.contains("signal") && j.contains("corruption");
  if (inst.has_ground_truth) {
    inst.signal = SparseGroundTruthFromJson(j["signal"]);
    inst.corruption = SparseGroundTruthFromJson(j["corruption"]);
    if (inst.signal.dimension != n || inst.corruption.dimension != m) {
      throw Error(ErrorCode::kShape, "ground-truth dimensions disagree");
    }
  } else {
    inst.signal.dimension = n;
    inst.corruption.dimension = m;
  }
  return inst;
}

Json ToJson(const SolverConfig& c) {
  Json j;
  j["primal_tol"] = c.primal_tol;
  j["dual_tol"] = c.dual_tol;
  j["max_iters"] = c.max_iters;
  j["relax"] = c.relax;
  j["refine"] = c.refine;
  j["refine_mag_tol"] = c.refine_mag_tol;
  j["kkt_tol"] = c.kkt_tol;
  return j;
}

SolverConfig SolverConfigFromJson(const Json& j, SolverConfig c) {
  if (j.contains("primal_tol")) c.primal_tol = j["primal_tol"].get<double>();
  if (j.contains("dual_tol")) c.dual_tol = j["dual_tol"].get<double>();
  if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<int>();
  if (j.contains("relax")) c.relax = j["relax"].get<double>();
  if (j.contains("refine")) c.refine = j["refine"].get<bool>();
  if (j.contains("refine_mag_tol")) {
    c.refine_mag_tol = j["refine_mag_tol"].get<double>();
  }
  if (j.contains("kkt_tol")) c.kkt_tol = j["kkt_tol"].get<double>();
  c.Validate();
  return c;
}

Json ToJson(const SolveResult& r) {
  Json j;
  j["status"] = SolveStatusName(r.status);
  j["iterations"] = r.iterations;
  j["primal_residual"] = r.primal_residual;
  j["dual_residual"] = r.dual_residual;
  j["refined"] = r.refined;
  if (r.relative_error) {
    j["relative_error"] = *r.relative_error;
  } else {
    j["relative_error"] = nullptr;
  }
  j["x_hat"] = ToJson(r.x_hat);
  j["f_hat"] = ToJson(r.f_hat);
  return j;
}

Json ToJson(const KktReport& r) {
  Json j;
  j["feasible"] = r.feasible;
  j["passed"] = r.passed;
  j["unique"] = r.unique;
  j["full_column_rank"] = r.full_column_rank;
  j["primal_residual"] = r.primal_residual;
  j["sign_residual"] = r.sign_residual;
  j["off_support_max"] = r.off_support_max;
  j["support"] = ArrayJson(r.support);
  j["witness"] = ToJson(r.witness);
  return j;
}

Json ToJson(const GolfingParams& p) {
  Json j;
  j["theta_a"] = p.theta_a;
  j["theta_i"] = p.theta_i;
  j["c_i"] = p.c_i;
  j["epsilon_prob"] = p.epsilon_prob;
  j["c_1"] = p.c_1;
  return j;
}

Json ToJson(const GolfingState& s) {
  Json j;
  Json dh = Json::array(), du = Json::array(), w = Json::array(),
       lam = Json::array();
  for (const auto& v : s.dh) dh.push_back(ToJson(v));
  for (const auto& v : s.du) du.push_back(ToJson(v));
  for (const auto& v : s.w) w.push_back(ToJson(v));
  for (const auto& v : s.lambda_sets) lam.push_back(ArrayJson(v));
  j["dh"] = std::move(dh);
  j["du"] = std::move(du);
  j["w"] = std::move(w);
  j["lambda_sets"] = std::move(lam);
  j["step_coefficients"] = ArrayJson(s.step_coefficients);
  j["h"] = ToJson(s.h);
  j["u"] = ToJson(s.u);
  return j;
}

Json ToJson(const CertReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["cond_hsf"] = r.cond_hsf;
  j["hsf_max_deviation"] = r.hsf_max_deviation;
  j["cond_usx"] = r.cond_usx;
  j["usx_max_deviation"] = r.usx_max_deviation;
  j["max_u_off"] = r.max_u_off;
  j["cond_u_off"] = r.cond_u_off;
  j["max_h_off"] = r.max_h_off;
  j["cond_h_off"] = r.cond_h_off;
  j["per_step_du_off"] = ArrayJson(r.per_step_du_off);
  j["per_step_du_threshold"] = ArrayJson(r.per_step_du_threshold);
  j["per_step_du_ok"] = ArrayJson(r.per_step_du_ok);
  j["per_step_h_off"] = ArrayJson(r.per_step_h_off);
  j["per_step_h_ok"] = ArrayJson(r.per_step_h_ok);
  j["per_step_all_ok"] = r.per_step_all_ok;
  j["b_full_rank"] = r.b_full_rank;
  j["b_sigma_min"] = r.b_sigma_min;
  j["b_sigma_max"] = r.b_sigma_max;
  return j;
}

Json ToJson(const CertificateEventTable& t) {
  Json j;
  j["trials"] = t.trials;
  j["degenerate"] = t.degenerate;
  Json events = Json::array();
  for (const auto& e : t.events) {
    Json row;
    row["event"] = e.name;
    row["hits"] = e.hits;
    row["frequency"] = e.frequency;
    row["bound"] = e.bound;
    events.push_back(std::move(row));
  }
  j["events"] = std::move(events);
  return j;
}

Json ToJson(const RipEstimate& e) {
  Json j;
  j["mode"] = RipModeName(e.mode);
  j["s1"] = e.s1;
  j["s2"] = e.s2;
  j["delta"] = e.delta;
  j["pairs_evaluated"] = e.pairs_evaluated;
  j["argmax_supports"] = {{"signal", ArrayJson(e.argmax_supports.first)},
                          {"corruption", ArrayJson(e.argmax_supports.second)}};
  return j;
}

Json ToJson(const TheoryConfig& c) {
  Json j;
  j["m"] = c.m;
  j["n"] = c.n;
  j["sx_size"] = c.sx_size;
  j["sf_size"] = c.sf_size;
  j["epsilon_prob"] = c.epsilon_prob;
  j["c"] = c.c;
  j["c_tilde"] = c.c_tilde;
  j["c_i"] = c.c_i;
  j["c_1"] = c.c_1;
  j["alpha"] = c.alpha;
  return j;
}

Json ToJson(const Thm21Budgets& b) {
  Json j;
  j["sx_max"] = b.sx_max;
  j["sf_max"] = b.sf_max;
  j["lambda"] = b.lambda;
  return j;
}

namespace {

Json TermsJson(const std::vector<BoundTerm>& terms) {
  Json a = Json::array();
  for (const auto& t : terms) a.push_back({{"term", t.name}, {"value", t.value}});
  return a;
}

}  // namespace

Json ToJson(const Thm22Conditions& c) {
  Json j;
  j["log_term"] = c.log_term;
  j["measurement_terms"] = TermsJson(c.measurement_terms);
  j["measurement_lhs"] = c.measurement_lhs;
  j["measurement_rhs"] = c.measurement_rhs;
  j["measurement_binding"] = c.measurement_binding;
  j["measurement_condition_met"] = c.measurement_condition_met;
  j["m_required"] = c.m_required;
  j["m_deficit"] = c.m_deficit;
  j["c_i_terms"] = TermsJson(c.c_i_terms);
  j["c_i_min_ctilde_reading"] = c.c_i_min_ctilde_reading;
  j["c_i_min_c_reading"] = c.c_i_min_c_reading;
  j["c_i_ok_ctilde_reading"] = c.c_i_ok_ctilde_reading;
  j["c_i_ok_c_reading"] = c.c_i_ok_c_reading;
  j["c_i_ok"] = c.c_i_ok;
  j["c_1_terms"] = TermsJson(c.c_1_terms);
  j["c_1_min"] = c.c_1_min;
  j["c_1_binding"] = c.c_1_binding;
  j["c_1_ok"] = c.c_1_ok;
  j["note"] = c.note;
  return j;
}

Json ToJson(const Thm22Probabilities& p) {
  Json j;
  j["P_du"] = ArrayJson(p.p_du);
  j["P_dh"] = ArrayJson(p.p_dh);
  j["total_lower_bound"] = p.total_lower_bound;
  return j;
}

Json ToJson(const GridSpec& s) {
  Json j;
  j["n_values"] = ArrayJson(s.n_values);
  j["theta_m_values"] = ArrayJson(s.theta_m_values);
  j["theta_f_values"] = ArrayJson(s.theta_f_values);
  j["trials"] = s.trials;
  j["master_seed"] = s.master_seed;
  j["mode"] = ExperimentModeName(s.mode);
  j["ensemble"] = EnsembleKindName(s.ensemble);
  j["success_threshold"] = s.success_threshold;
  j["signal_std"] = s.signal_std;
  j["corruption_std"] = s.corruption_std;
  j["normalize_weighted"] = s.normalize_weighted;
  j["solver"] = ToJson(s.solver);
  return j;
}

GridSpec GridSpecFromJson(const Json& j, GridSpec s) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidSpec, "grid spec must be a JSON object");
  }
  static const char* kKnown[] = {
      "n_values",       "theta_m_values",    "theta_f_values", "trials",
      "master_seed",    "mode",              "ensemble",       "success_threshold",
      "signal_std",     "corruption_std",    "normalize_weighted", "solver"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKnown) known = known || it.key() == k;
    if (!known) {
      throw Error(ErrorCode::kInvalidSpec,
                  "unknown grid spec field '" + it.key() + "'");
    }
  }
  try {
    if (j.contains("n_values")) s.n_values = j["n_values"].get<std::vector<int>>();
    if (j.contains("theta_m_values")) {
      s.theta_m_values = j["theta_m_values"].get<std::vector<double>>();
    }
    if (j.contains("theta_f_values")) {
      s.theta_f_values = j["theta_f_values"].get<std::vector<double>>();
    }
    if (j.contains("trials")) s.trials = j["trials"].get<int>();
    if (j.contains("master_seed")) {
      s.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("mode")) {
      s.mode = ParseExperimentMode(j["mode"].get<std::string>());
    }
    if (j.contains("ensemble")) {
      s.ensemble = ParseEnsembleKind(j["ensemble"].get<std::string>());
    }
    if (j.contains("success_threshold")) {
      s.success_threshold = j["success_threshold"].get<double>();
    }
    if (j.contains("signal_std")) s.signal_std = j["signal_std"].get<double>();
    if (j.contains("corruption_std")) {
      s.corruption_std = j["corruption_std"].get<double>();
    }
    if (j.contains("normalize_weighted")) {
      s.normalize_weighted = j["normalize_weighted"].get<bool>();
    }
    if (j.contains("solver")) s.solver = SolverConfigFromJson(j["solver"], s.solver);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("bad grid spec value: ") + e.what());
  }
  s.Validate();
  return s;
}

Json ToJson(const HeatMap& h) {
  Json j;
  j["format"] = "cscorr.heatmap";
  j["version"] = 1;
  j["n"] = h.n;
  j["mode"] = ExperimentModeName(h.mode);
  j["trials"] = h.trials;
  j["success_threshold"] = h.success_threshold;
  j["master_seed"] = h.master_seed;
  j["theta_m"] = ArrayJson(h.theta_m);
  j["theta_f"] = ArrayJson(h.theta_f);
  j["sx_size"] = h.sx_size;
  j["m_values"] = ArrayJson(h.m_values);
  j["sf_sizes"] = IntMatrixJson(h.sf_sizes);
  j["applicable"] = IntMatrixJson(h.applicable);
  j["cells"] = ToJson(h.cells);
  j["successes"] = IntMatrixJson(h.successes);
  j["nonconverged"] = IntMatrixJson(h.nonconverged);
  Json seeds = Json::array();
  for (size_t i = 0; i < h.theta_m.size(); ++i) {
    Json row = Json::array();
    for (size_t k = 0; k < h.theta_f.size(); ++k) {
      Json cell = Json::array();
      for (int t = 0; t < h.trials; ++t) {
        cell.push_back(h.TrialSeedAt(static_cast<int>(i), static_cast<int>(k), t));
      }
      row.push_back(std::move(cell));
    }
    seeds.push_back(std::move(row));
  }
  j["trial_seeds"] = std::move(seeds);
  return j;
}

HeatMap HeatMapFromJson(const Json& j) {
  HeatMap h;
  try {
    h.n = Require(j, "n").get<int>();
    h.mode = ParseExperimentMode(Require(j, "mode").get<std::string>());
    h.trials = Require(j, "trials").get<int>();
    h.success_threshold = Require(j, "success_threshold").get<double>();
    h.master_seed = Require(j, "master_seed").get<std::uint64_t>();
    h.theta_m = Require(j, "theta_m").get<std::vector<double>>();
    h.theta_f = Require(j, "theta_f").get<std::vector<double>>();
    h.sx_size = Require(j, "sx_size").get<int>();
    h.m_values = Require(j, "m_values").get<std::vector<int>>();
    const Eigen::Index rows = h.theta_m.size();
    const Eigen::Index cols = h.theta_f.size();
    h.sf_sizes = IntMatrixFromJson(Require(j, "sf_sizes"), rows, cols);
    h.applicable = IntMatrixFromJson(Require(j, "applicable"), rows, cols);
    h.cells = MatrixFromJson(Require(j, "cells"));
    if (h.cells.rows() != rows || h.cells.cols() != cols) {
      throw Error(ErrorCode::kShape, "cells do not match the axes");
    }
    h.successes = IntMatrixFromJson(Require(j, "successes"), rows, cols);
    h.nonconverged = IntMatrixFromJson(Require(j, "nonconverged"), rows, cols);
    const Json& seeds = Require(j, "trial_seeds");
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index k = 0; k < cols; ++k) {
        const Json& cell = seeds.at(i).at(k);
        if (static_cast<int>(cell.size()) != h.trials) {
          throw Error(ErrorCode::kShape, "trial seed count mismatch");
        }
        for (const auto& s : cell) h.trial_seeds.push_back(s.get<std::uint64_t>());
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("bad heat-map document: ") + e.what());
  }
  return h;
}

}  // namespace cscorr
