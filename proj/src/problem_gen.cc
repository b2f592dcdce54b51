#include "cscorr/problem_gen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

#include "cscorr/error.h"
#include "cscorr/random.h"

namespace cscorr {

const char* EnsembleKindName(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::kGaussianIid:
      return "gaussian_iid";
    case EnsembleKind::kRademacherIid:
      return "rademacher_iid";
    case EnsembleKind::kGaussianTimesOrthobasis:
      return "gaussian_times_orthobasis";
  }
  return "unknown";
}

EnsembleKind ParseEnsembleKind(const std::string& name) {
  if (name == "gaussian_iid" || name == "gaussian") {
    return EnsembleKind::kGaussianIid;
  }
  if (name == "rademacher_iid" || name == "rademacher") {
    return EnsembleKind::kRademacherIid;
  }
  if (name == "gaussian_times_orthobasis" || name == "gaussian_dct") {
    return EnsembleKind::kGaussianTimesOrthobasis;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown ensemble kind '" + name + "'");
}

void EnsembleSpec::Validate() const {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::kInvalidSpec,
                "ensemble needs rows >= 1 and cols >= 1, got " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Eigen::MatrixXd DctBasis(int n) {
  Eigen::MatrixXd basis(n, n);
  const double pi = std::numbers::pi;
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int j = 0; j < n; ++j) {
      basis(k, j) = scale * std::cos(pi * (j + 0.5) * k / n);
    }
  }
  return basis;
}

Eigen::MatrixXd GenerateSensingMatrix(const EnsembleSpec& spec) {
  spec.Validate();
  Rng rng = MakeRng(spec.seed);
  Eigen::MatrixXd a(spec.rows, spec.cols);
  switch (spec.kind) {
    case EnsembleKind::kGaussianIid:
    case EnsembleKind::kGaussianTimesOrthobasis: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < spec.rows; ++i) {
        for (int j = 0; j < spec.cols; ++j) {
          a(i, j) = normal(rng);
        }
      }
      break;
    }
    case EnsembleKind::kRademacherIid: {
      for (int i = 0; i < spec.rows; ++i) {
        for (int j = 0; j < spec.cols; ++j) {
          a(i, j) = (rng() >> 63) ? 1.0 : -1.0;
        }
      }
      break;
    }
  }
  if (spec.kind == EnsembleKind::kGaussianTimesOrthobasis) {
    a = a * DctBasis(spec.cols);
  }
  return a;
}

Eigen::VectorXd SparseGroundTruth::Dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension);
  for (size_t k = 0; k < support.size(); ++k) {
    v(support[k]) = values[k];
  }
  return v;
}

Eigen::VectorXd SparseGroundTruth::Signs() const {
  Eigen::VectorXd s(support.size());
  for (size_t k = 0; k < values.size(); ++k) {
    s(k) = values[k] > 0 ? 1.0 : -1.0;
  }
  return s;
}

void SparseGroundTruth::Validate() const {
  if (dimension < 0) {
    throw Error(ErrorCode::kInvalidSpec, "negative ground-truth dimension");
  }
  if (support.size() != values.size()) {
    throw Error(ErrorCode::kShape, "support and values differ in length");
  }
  for (size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= dimension) {
      throw Error(ErrorCode::kInvalidSpec, "support index out of range");
    }
    if (k > 0 && support[k] <= support[k - 1]) {
      throw Error(ErrorCode::kInvalidSpec, "support must be sorted, distinct");
    }
    if (values[k] == 0.0) {
      throw Error(ErrorCode::kInvalidSpec, "zero value on the support");
    }
  }
}

SparseGroundTruth GenerateSparseGroundTruth(int dimension, int sparsity,
                                            double magnitude_std,
                                            std::uint64_t seed) {
  if (dimension < 1 || sparsity < 0 || sparsity > dimension) {
    throw Error(ErrorCode::kInvalidSpec,
                "need 0 <= sparsity <= dimension, got sparsity " +
                    std::to_string(sparsity) + " for dimension " +
                    std::to_string(dimension));
  }
  if (!(magnitude_std > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "magnitude_std must be positive");
  }
  Rng rng = MakeRng(seed);
  SparseGroundTruth truth;
  truth.dimension = dimension;
  truth.magnitude_std = magnitude_std;

  std::vector<int> all(dimension);
  std::iota(all.begin(), all.end(), 0);
  truth.support.reserve(sparsity);
  // Selection sampling: every size-k subset is equally likely, output sorted.
  std::sample(all.begin(), all.end(), std::back_inserter(truth.support),
              sparsity, rng);

  std::normal_distribution<double> normal(0.0, magnitude_std);
  truth.values.reserve(sparsity);
  for (int k = 0; k < sparsity; ++k) {
    double v = 0.0;
    while (v == 0.0) v = normal(rng);
    truth.values.push_back(v);
  }
  return truth;
}

ProblemInstance AssembleMeasurements(const Eigen::MatrixXd& matrix,
                                     const SparseGroundTruth& signal,
                                     const SparseGroundTruth& corruption,
                                     const Eigen::VectorXd& dense_noise) {
  signal.Validate();
  corruption.Validate();
  if (signal.dimension != matrix.cols() ||
      corruption.dimension != matrix.rows() ||
      dense_noise.size() != matrix.rows()) {
    throw Error(ErrorCode::kShape,
                "instance dimensions disagree with the " +
                    std::to_string(matrix.rows()) + "x" +
                    std::to_string(matrix.cols()) + " matrix");
  }
  ProblemInstance instance;
  instance.matrix = matrix;
  instance.signal = signal;
  instance.corruption = corruption;
  instance.dense_noise = dense_noise;
  instance.noise_radius = dense_noise.norm();
  instance.measurements = dense_noise;
  for (size_t k = 0; k < signal.support.size(); ++k) {
    instance.measurements += signal.values[k] * matrix.col(signal.support[k]);
  }
  for (size_t k = 0; k < corruption.support.size(); ++k) {
    instance.measurements(corruption.support[k]) += corruption.values[k];
  }
  return instance;
}

Eigen::VectorXd GenerateDenseNoise(int dimension, double radius,
                                   std::uint64_t seed) {
  if (dimension < 1 || radius < 0.0) {
    throw Error(ErrorCode::kInvalidSpec, "bad dense-noise request");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension);
  if (radius == 0.0) return v;
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (v.norm() == 0.0) {
    for (int i = 0; i < dimension; ++i) v(i) = normal(rng);
  }
  return v * (radius / v.norm());
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd RandomUnitVector(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(n);
  do {
    for (int i = 0; i < n; ++i) x(i) = normal(rng);
  } while (x.norm() == 0.0);
  return x.normalized();
}

}  // namespace

TailReport SubgaussianTailDiagnostic(std::span<const double> samples,
                                     std::span<const double> weight, double c,
                                     std::span<const double> t_grid) {
  if (samples.empty() || weight.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "tail diagnostic needs samples");
  }
  if (samples.size() % weight.size() != 0) {
    throw Error(ErrorCode::kShape,
                "sample count must be a multiple of the weight length");
  }
  if (!(c > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "subgaussian parameter must be > 0");
  }
  const size_t k = weight.size();
  const size_t num_draws = samples.size() / k;
  double weight_norm_sq = 0.0;
  for (double a : weight) weight_norm_sq += a * a;

  std::vector<double> z(num_draws);
  for (size_t d = 0; d < num_draws; ++d) {
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) acc += weight[i] * samples[d * k + i];
    z[d] = std::abs(acc);
  }

  TailReport report;
  report.num_draws = static_cast<int>(num_draws);
  report.c = c;
  report.weight_norm_sq = weight_norm_sq;
  for (double t : t_grid) {
    TailPoint p;
    p.t = t;
    const auto hits = std::count_if(z.begin(), z.end(),
                                    [t](double v) { return v >= t; });
    p.frequency = static_cast<double>(hits) / num_draws;
    p.bound = 2.0 * std::exp(-t * t / (4.0 * c * weight_norm_sq));
    const double q = std::min(p.bound, 1.0);
    p.std_error = std::sqrt(q * (1.0 - q) / num_draws);
    p.flagged = p.frequency > p.bound + 3.0 * p.std_error;
    report.any_flagged = report.any_flagged || p.flagged;
    report.points.push_back(p);
  }
  return report;
}

ConcentrationReport ConcentrationDiagnostic(const EnsembleSpec& spec,
                                            int trials, double t,
                                            double c_tilde) {
  spec.Validate();
  if (trials < 100) {
    throw Error(ErrorCode::kInvalidSpec, "concentration needs >= 100 trials");
  }
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "t must lie in (0, 1)");
  }
  Rng rng = MakeRng(DeriveSeed(spec.seed, {0x78}));
  const Eigen::VectorXd x = RandomUnitVector(spec.cols, rng);

  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    EnsembleSpec fresh = spec;
    fresh.seed = DeriveSeed(spec.seed, {static_cast<std::uint64_t>(trial)});
    const Eigen::MatrixXd a = GenerateSensingMatrix(fresh);
    const double ratio = (a * x).squaredNorm() / spec.rows;
    if (std::abs(ratio - 1.0) >= t) ++hits;
  }
  ConcentrationReport report;
  report.trials = trials;
  report.rows = spec.rows;
  report.t = t;
  report.c_tilde = c_tilde;
  report.frequency = static_cast<double>(hits) / trials;
  report.std_error =
      std::sqrt(report.frequency * (1.0 - report.frequency) / trials);
  report.bound = 2.0 * std::exp(-c_tilde * t * t * spec.rows);
  return report;
}

IsotropyReport IsotropyDiagnostic(const EnsembleSpec& spec,
                                  int num_directions) {
  spec.Validate();
  if (spec.rows < 2 || num_directions < 1) {
    throw Error(ErrorCode::kInvalidSpec,
                "isotropy needs >= 2 rows and >= 1 direction");
  }
  const Eigen::MatrixXd a = GenerateSensingMatrix(spec);
  Rng rng = MakeRng(DeriveSeed(spec.seed, {0x150}));
  IsotropyReport report;
  report.rows = spec.rows;
  for (int d = 0; d < num_directions; ++d) {
    const Eigen::VectorXd x = RandomUnitVector(spec.cols, rng);
    const Eigen::ArrayXd sq = (a * x).array().square();
    IsotropyDirection dir;
    dir.mean = sq.mean();
    const double var =
        (sq - dir.mean).square().sum() / static_cast<double>(spec.rows - 1);
    dir.std_error = std::sqrt(var / spec.rows);
    dir.within_band = std::abs(dir.mean - 1.0) < 3.0 * dir.std_error;
    if (!dir.within_band) ++report.violations;
    report.directions.push_back(dir);
  }
  return report;
}

}  // namespace cscorr
