#include "cscorr/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "cscorr/error.h"
#include "cscorr/json_io.h"
#include "cscorr/random.h"
#include "cscorr/theory_bounds.h"

namespace cscorr {

namespace {

void CheckRatios(const std::vector<double>& values, const char* name) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidSpec, std::string(name) + " is empty");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] <= 1.0)) {
      throw Error(ErrorCode::kInvalidSpec,
                  std::string(name) + " entries must lie in (0, 1]");
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorCode::kInvalidSpec,
                  std::string(name) + " must be strictly increasing");
    }
  }
}

std::string FormatRatio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

const char* ExperimentModeName(ExperimentMode mode) {
  return mode == ExperimentMode::kThm21 ? "thm21" : "thm22";
}

ExperimentMode ParseExperimentMode(const std::string& name) {
  if (name == "thm21") return ExperimentMode::kThm21;
  if (name == "thm22") return ExperimentMode::kThm22;
  throw Error(ErrorCode::kInvalidSpec, "unknown mode '" + name + "'");
}

void GridSpec::Validate() const {
  if (n_values.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "n_values is empty");
  }
  for (int n : n_values) {
    // sx = floor(0.2n / ln(0.2n)) + 1 needs 0.2n > 1.
    if (n < 6) {
      throw Error(ErrorCode::kInvalidSpec, "every n must be >= 6");
    }
  }
  CheckRatios(theta_m_values, "theta_m_values");
  CheckRatios(theta_f_values, "theta_f_values");
  if (trials < 1) throw Error(ErrorCode::kInvalidSpec, "trials must be >= 1");
  if (!(success_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "success_threshold must be > 0");
  }
  if (!(signal_std > 0.0) || !(corruption_std > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "magnitude stds must be > 0");
  }
  solver.Validate();
}

CellSizes DeriveCellSizes(int n, double theta_m, double theta_f) {
  if (!(theta_m > 0.0 && theta_m <= 1.0) ||
      !(theta_f > 0.0 && theta_f <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "ratios must lie in (0, 1]");
  }
  if (n < 6) throw Error(ErrorCode::kInvalidSpec, "n must be >= 6");
  CellSizes s;
  s.m = static_cast<int>(std::lround(theta_m * n));
  s.sf_size = static_cast<int>(std::floor(theta_f * s.m));
  const double base = 0.2 * n;
  s.sx_size = static_cast<int>(std::floor(base / std::log(base))) + 1;
  return s;
}

bool CellApplicable(const CellSizes& sizes, int n, ExperimentMode mode) {
  if (sizes.m < 1 || sizes.sx_size >= n || sizes.sf_size > sizes.m) {
    return false;
  }
  if (mode == ExperimentMode::kThm22) {
    return sizes.sf_size >= 1 && sizes.m / 10 >= 1;
  }
  return true;
}

std::uint64_t TrialSeed(std::uint64_t master_seed, int n, int theta_m_index,
                        int theta_f_index, int trial) {
  return DeriveSeed(master_seed, {static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(theta_m_index),
                                  static_cast<std::uint64_t>(theta_f_index),
                                  static_cast<std::uint64_t>(trial)});
}

ProblemInstance BuildTrialInstance(const GridSpec& spec, int n,
                                   const CellSizes& sizes,
                                   std::uint64_t trial_seed) {
  Eigen::MatrixXd a = GenerateSensingMatrix(
      {spec.ensemble, sizes.m, n, DeriveSeed(trial_seed, {1})});
  if (spec.mode == ExperimentMode::kThm21 && spec.normalize_weighted) {
    a /= std::sqrt(static_cast<double>(sizes.m));
  }
  const SparseGroundTruth x = GenerateSparseGroundTruth(
      n, sizes.sx_size, spec.signal_std, DeriveSeed(trial_seed, {2}));
  const SparseGroundTruth f = GenerateSparseGroundTruth(
      sizes.m, sizes.sf_size, spec.corruption_std, DeriveSeed(trial_seed, {3}));
  return AssembleMeasurements(a, x, f, Eigen::VectorXd::Zero(sizes.m));
}

TrialOutcome RunTrial(const GridSpec& spec, int n, const CellSizes& sizes,
                      std::uint64_t trial_seed) {
  const ProblemInstance inst = BuildTrialInstance(spec, n, sizes, trial_seed);
  SolveResult r;
  if (spec.mode == ExperimentMode::kThm21) {
    r = SolveWeightedCorruption(inst, LambdaExperiment(n, sizes.sx_size), 0.0,
                                spec.solver);
  } else {
    // The scale is set from |s_f| = 0.1 m whatever the cell's corruption.
    const double theta_a = 1.0 / std::sqrt(static_cast<double>(sizes.m / 10));
    const double theta_i = 2.0 * std::sqrt(std::log(2.0 * n / 0.01));
    r = SolveScaledCorruption(inst, theta_a, theta_i, spec.solver);
  }
  TrialOutcome out;
  out.converged = r.converged();
  out.relative_error = r.relative_error.value_or(
      std::numeric_limits<double>::infinity());
  out.success = out.converged && out.relative_error < spec.success_threshold;
  return out;
}

std::vector<HeatMap> RunPhaseGrid(const GridSpec& spec, int workers) {
  spec.Validate();
  const size_t nm = spec.theta_m_values.size();
  const size_t nf = spec.theta_f_values.size();
  const size_t trials = spec.trials;

  std::vector<HeatMap> maps;
  struct Task {
    size_t map;
    int i;
    int j;
    int t;
  };
  std::vector<Task> tasks;
  for (size_t k = 0; k < spec.n_values.size(); ++k) {
    const int n = spec.n_values[k];
    HeatMap h;
    h.n = n;
    h.mode = spec.mode;
    h.trials = spec.trials;
    h.success_threshold = spec.success_threshold;
    h.master_seed = spec.master_seed;
    h.theta_m = spec.theta_m_values;
    h.theta_f = spec.theta_f_values;
    h.m_values.resize(nm);
    h.sf_sizes.setZero(nm, nf);
    h.applicable.setZero(nm, nf);
    h.cells.setConstant(nm, nf, std::numeric_limits<double>::quiet_NaN());
    h.successes.setZero(nm, nf);
    h.nonconverged.setZero(nm, nf);
    h.trial_seeds.resize(nm * nf * trials);
    for (size_t i = 0; i < nm; ++i) {
      for (size_t j = 0; j < nf; ++j) {
        const CellSizes s = DeriveCellSizes(n, spec.theta_m_values[i],
                                            spec.theta_f_values[j]);
        h.sx_size = s.sx_size;
        h.m_values[i] = s.m;
        h.sf_sizes(i, j) = s.sf_size;
        const bool ok = CellApplicable(s, n, spec.mode);
        h.applicable(i, j) = ok ? 1 : 0;
        for (size_t t = 0; t < trials; ++t) {
          h.trial_seeds[(i * nf + j) * trials + t] =
              TrialSeed(spec.master_seed, n, static_cast<int>(i),
                        static_cast<int>(j), static_cast<int>(t));
          if (ok) {
            tasks.push_back({k, static_cast<int>(i), static_cast<int>(j),
                             static_cast<int>(t)});
          }
        }
      }
    }
    maps.push_back(std::move(h));
  }

  std::vector<TrialOutcome> outcomes(tasks.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    while (true) {
      const size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task& task = tasks[idx];
      const HeatMap& h = maps[task.map];
      try {
        const CellSizes s = DeriveCellSizes(h.n, h.theta_m[task.i],
                                            h.theta_f[task.j]);
        outcomes[idx] =
            RunTrial(spec, h.n, s, h.TrialSeedAt(task.i, task.j, task.t));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
        return;
      }
    }
  };
  if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  for (size_t idx = 0; idx < tasks.size(); ++idx) {
    HeatMap& h = maps[tasks[idx].map];
    if (outcomes[idx].success) ++h.successes(tasks[idx].i, tasks[idx].j);
    if (!outcomes[idx].converged) ++h.nonconverged(tasks[idx].i, tasks[idx].j);
  }
  for (HeatMap& h : maps) {
    for (size_t i = 0; i < nm; ++i) {
      for (size_t j = 0; j < nf; ++j) {
        if (h.applicable(i, j)) {
          h.cells(i, j) = static_cast<double>(h.successes(i, j)) / trials;
        }
      }
    }
  }
  return maps;
}

double MonotoneTrendFraction(const HeatMap& map, bool along_theta_m) {
  int pairs = 0;
  int good = 0;
  const Eigen::Index rows = map.cells.rows();
  const Eigen::Index cols = map.cells.cols();
  if (along_theta_m) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i + 1 < rows; ++i) {
        if (!map.applicable(i, j) || !map.applicable(i + 1, j)) continue;
        ++pairs;
        if (map.cells(i + 1, j) >= map.cells(i, j)) ++good;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j + 1 < cols; ++j) {
        if (!map.applicable(i, j) || !map.applicable(i, j + 1)) continue;
        ++pairs;
        if (map.cells(i, j + 1) <= map.cells(i, j)) ++good;
      }
    }
  }
  return pairs == 0 ? 1.0 : static_cast<double>(good) / pairs;
}

std::string HeatMapCsv(const HeatMap& map) {
  std::string out = "theta_m\\theta_f";
  for (double f : map.theta_f) out += "," + FormatRatio(f);
  out += '\n';
  char buf[32];
  for (size_t i = 0; i < map.theta_m.size(); ++i) {
    out += FormatRatio(map.theta_m[i]);
    for (size_t j = 0; j < map.theta_f.size(); ++j) {
      if (map.applicable(i, j)) {
        std::snprintf(buf, sizeof(buf), ",%.4f", map.cells(i, j));
        out += buf;
      } else {
        out += ",NA";
      }
    }
    out += '\n';
  }
  return out;
}

std::string HeatMapPgm(const HeatMap& map) {
  const size_t rows = map.theta_m.size();
  const size_t cols = map.theta_f.size();
  std::string out = "P5\n";
  out += "# n=" + std::to_string(map.n) + " mode=" +
         ExperimentModeName(map.mode) +
         " rows=theta_m ascending cols=theta_f ascending\n";
  std::string na;
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      if (!map.applicable(i, j)) {
        na += " (" + FormatRatio(map.theta_m[i]) + "," +
              FormatRatio(map.theta_f[j]) + ")";
      }
    }
  }
  if (!na.empty()) out += "# inapplicable (pixel 0):" + na + "\n";
  out += std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      const double v = map.applicable(i, j) ? map.cells(i, j) : 0.0;
      const long px = std::lround(255.0 * std::clamp(v, 0.0, 1.0));
      out += static_cast<char>(static_cast<unsigned char>(px));
    }
  }
  return out;
}

void EmitCsv(const HeatMap& map, const std::string& path) {
  WriteTextFile(path, HeatMapCsv(map));
}

void EmitPgm(const HeatMap& map, const std::string& path) {
  WriteTextFile(path, HeatMapPgm(map));
}

void EmitJson(const HeatMap& map, const std::string& path) {
  WriteTextFile(path, DumpJson(ToJson(map)) + "\n");
}

HeatMap LoadHeatMapJson(const std::string& path) {
  return HeatMapFromJson(ReadJsonFile(path));
}

}  // namespace cscorr
