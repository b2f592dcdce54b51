#ifndef CSCORR_PROBLEM_GEN_H_
#define CSCORR_PROBLEM_GEN_H_

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cscorr {

enum class EnsembleKind {
  kGaussianIid,
  kRademacherIid,
  // m x n standard normal matrix times the n x n orthonormal DCT-II basis.
  kGaussianTimesOrthobasis,
};

const char* EnsembleKindName(EnsembleKind kind);
// Accepts "gaussian_iid"/"gaussian", "rademacher_iid"/"rademacher",
// "gaussian_times_orthobasis"/"gaussian_dct".
EnsembleKind ParseEnsembleKind(const std::string& name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::kGaussianIid;
  int rows = 0;
  int cols = 0;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Rows are independent, isotropic and subgaussian for every kind. Output is a
// pure function of the spec.
Eigen::MatrixXd GenerateSensingMatrix(const EnsembleSpec& spec);

// Orthonormal DCT-II matrix; row k is the k-th cosine basis vector.
Eigen::MatrixXd DctBasis(int n);

struct SparseGroundTruth {
  int dimension = 0;
  std::vector<int> support;   // sorted, distinct
  std::vector<double> values;  // nonzero, aligned with support
  double magnitude_std = 1.0;

  Eigen::VectorXd Dense() const;
  // sgn of the values on the support.
  Eigen::VectorXd Signs() const;
  void Validate() const;
};

// Support uniform over all size-`sparsity` subsets, values i.i.d.
// N(0, magnitude_std^2) with exact zeros redrawn.
SparseGroundTruth GenerateSparseGroundTruth(int dimension, int sparsity,
                                            double magnitude_std,
                                            std::uint64_t seed);

struct ProblemInstance {
  Eigen::MatrixXd matrix;
  SparseGroundTruth signal;
  SparseGroundTruth corruption;
  Eigen::VectorXd dense_noise;
  double noise_radius = 0.0;
  Eigen::VectorXd measurements;
  // False for instances loaded from measurements alone; signal and
  // corruption are then empty placeholders of the right dimension.
  bool has_ground_truth = true;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

// b = A x* + f* + v, noise_radius = ||v||_2.
ProblemInstance AssembleMeasurements(const Eigen::MatrixXd& matrix,
                                     const SparseGroundTruth& signal,
                                     const SparseGroundTruth& corruption,
                                     const Eigen::VectorXd& dense_noise);

// Gaussian direction rescaled to norm exactly `radius`.
Eigen::VectorXd GenerateDenseNoise(int dimension, double radius,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistical diagnostics on ensembles.

struct TailPoint {
  double t = 0.0;
  double frequency = 0.0;  // empirical P(|Z| >= t)
  double bound = 0.0;      // 2 exp(-t^2 / (4 c ||a||^2))
  double std_error = 0.0;  // binomial standard error at min(bound, 1)
  bool flagged = false;    // frequency > bound + 3 std_error
};

struct TailReport {
  int num_draws = 0;
  double c = 0.0;
  double weight_norm_sq = 0.0;
  std::vector<TailPoint> points;
  bool any_flagged = false;
};

// `samples` holds consecutive blocks of weight.size() draws; each block
// gives one Z = sum_i a_i X_i. With a single unit weight every sample is its
// own Z.
TailReport SubgaussianTailDiagnostic(std::span<const double> samples,
                                     std::span<const double> weight, double c,
                                     std::span<const double> t_grid);

struct ConcentrationReport {
  int trials = 0;
  int rows = 0;
  double t = 0.0;
  double c_tilde = 0.0;
  double frequency = 0.0;  // empirical P(|m^-1 ||Ax||^2 - 1| >= t)
  double std_error = 0.0;
  double bound = 0.0;      // 2 exp(-c_tilde t^2 m)
};

// Fresh matrix per trial (seed derived from spec.seed and the trial index),
// one fixed random unit x derived from spec.seed.
ConcentrationReport ConcentrationDiagnostic(const EnsembleSpec& spec,
                                            int trials, double t,
                                            double c_tilde = 0.05);

struct IsotropyDirection {
  double mean = 0.0;       // mean of <row, x>^2 over rows
  double std_error = 0.0;  // sqrt(sample variance / rows)
  bool within_band = true; // |mean - 1| < 3 std_error
};

struct IsotropyReport {
  int rows = 0;
  std::vector<IsotropyDirection> directions;
  int violations = 0;
};

// Draws one spec.rows x spec.cols matrix and tests E<row, x>^2 = 1 for
// `num_directions` random unit vectors x.
IsotropyReport IsotropyDiagnostic(const EnsembleSpec& spec,
                                  int num_directions);

}  // namespace cscorr

#endif  // CSCORR_PROBLEM_GEN_H_
