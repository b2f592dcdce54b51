#ifndef CSCORR_EXPERIMENT_H_
#define CSCORR_EXPERIMENT_H_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "cscorr/bp_solver.h"
#include "cscorr/problem_gen.h"

namespace cscorr {

enum class ExperimentMode {
  // Weighted program, lambda = 1 / sqrt(ln(n / sx)), equality constraint.
  kThm21,
  // Scaled program, theta_a = 1 / sqrt(floor(0.1 m)),
  // theta_i = 2 sqrt(ln(2n / 0.01)).
  kThm22,
};

const char* ExperimentModeName(ExperimentMode mode);
ExperimentMode ParseExperimentMode(const std::string& name);

struct GridSpec {
  std::vector<int> n_values = {128, 256, 512};
  // Both ratio lists must be strictly increasing, within (0, 1].
  std::vector<double> theta_m_values = {0.1, 0.2, 0.3, 0.4, 0.5,
                                        0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> theta_f_values = {0.1, 0.2, 0.3, 0.4, 0.5};
  int trials = 100;
  std::uint64_t master_seed = 0;
  ExperimentMode mode = ExperimentMode::kThm21;
  EnsembleKind ensemble = EnsembleKind::kGaussianIid;
  // Relative error threshold in percent.
  double success_threshold = 1e-8;
  double signal_std = 1.0;
  double corruption_std = 10.0;
  // Weighted mode measures with A / sqrt(m) (isotropic rows scaled to unit
  // column norm in expectation). False uses the raw ensemble.
  bool normalize_weighted = true;
  SolverConfig solver;

  void Validate() const;
};

struct CellSizes {
  int m = 0;
  int sx_size = 0;
  int sf_size = 0;
};

// m = round(theta_m n), sf = floor(theta_f m), sx = floor(0.2n / ln(0.2n)) + 1.
CellSizes DeriveCellSizes(int n, double theta_m, double theta_f);

// Inapplicable cells: m = 0, sx >= n, or (scaled mode) sf = 0 or
// floor(0.1 m) = 0.
bool CellApplicable(const CellSizes& sizes, int n, ExperimentMode mode);

std::uint64_t TrialSeed(std::uint64_t master_seed, int n, int theta_m_index,
                        int theta_f_index, int trial);

struct HeatMap {
  int n = 0;
  ExperimentMode mode = ExperimentMode::kThm21;
  int trials = 0;
  double success_threshold = 1e-8;
  std::uint64_t master_seed = 0;
  std::vector<double> theta_m;
  std::vector<double> theta_f;
  int sx_size = 0;
  std::vector<int> m_values;    // per theta_m
  Eigen::MatrixXi sf_sizes;     // theta_m x theta_f
  Eigen::MatrixXi applicable;   // 1 / 0
  Eigen::MatrixXd cells;        // success rate; NaN where inapplicable
  Eigen::MatrixXi successes;
  Eigen::MatrixXi nonconverged;
  // trial_seeds[(i * theta_f.size() + j) * trials + t].
  std::vector<std::uint64_t> trial_seeds;

  std::uint64_t TrialSeedAt(int i, int j, int t) const {
    return trial_seeds[(static_cast<size_t>(i) * theta_f.size() + j) * trials +
                       t];
  }
};

struct TrialOutcome {
  bool success = false;
  bool converged = false;
  double relative_error = 0.0;
};

// One trial of one cell; the instance is rebuilt from trial_seed.
ProblemInstance BuildTrialInstance(const GridSpec& spec, int n,
                                   const CellSizes& sizes,
                                   std::uint64_t trial_seed);
TrialOutcome RunTrial(const GridSpec& spec, int n, const CellSizes& sizes,
                      std::uint64_t trial_seed);

// One heat map per n. Results do not depend on `workers`.
std::vector<HeatMap> RunPhaseGrid(const GridSpec& spec, int workers = 1);

// Fraction of adjacent applicable pairs with nondecreasing success as theta_m
// grows (along_theta_m) or nonincreasing success as theta_f grows.
double MonotoneTrendFraction(const HeatMap& map, bool along_theta_m = true);

void EmitCsv(const HeatMap& map, const std::string& path);
void EmitPgm(const HeatMap& map, const std::string& path);
void EmitJson(const HeatMap& map, const std::string& path);
HeatMap LoadHeatMapJson(const std::string& path);

std::string HeatMapCsv(const HeatMap& map);
std::string HeatMapPgm(const HeatMap& map);

}  // namespace cscorr

#endif  // CSCORR_EXPERIMENT_H_
