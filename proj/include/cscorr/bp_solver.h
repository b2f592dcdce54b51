#ifndef CSCORR_BP_SOLVER_H_
#define CSCORR_BP_SOLVER_H_

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "cscorr/problem_gen.h"

namespace cscorr {

struct SolverConfig {
  // Relative stopping tolerances of the splitting iteration. A polished point
  // must also be feasible to primal_tol relative to max(1, ||b||_2).
  double primal_tol = 1e-12;
  double dual_tol = 1e-12;
  int max_iters = 100000;
  // Over-relaxation factor, in (1, 2).
  double relax = 1.8;
  // Least-squares polish on the detected support, certified by a KKT check.
  bool refine = true;
  // Support detection threshold, relative to ||z||_inf.
  double refine_mag_tol = 1e-6;
  // Tolerance for the KKT certificate of a polished point.
  double kkt_tol = 1e-9;

  void Validate() const;
};

enum class SolveStatus { kConverged, kNotConverged };

const char* SolveStatusName(SolveStatus status);

struct BpSolution {
  Eigen::VectorXd z;
  SolveStatus status = SolveStatus::kNotConverged;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool refined = false;

  bool converged() const { return status == SolveStatus::kConverged; }
};

// Weighted program min ||x||_1 + lambda ||f||_1 s.t. Ax + f = b rewritten as
// plain basis pursuit in z = [x; lambda f] with M = [A, (1/lambda) I_m].
struct StackedSystem {
  Eigen::MatrixXd matrix;
  double lambda = 1.0;
  int n = 0;
  int m = 0;

  Eigen::VectorXd Stack(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& f) const;
  void Unpack(const Eigen::VectorXd& z, Eigen::VectorXd* x,
              Eigen::VectorXd* f) const;
};

StackedSystem ReduceWeightedToBp(const Eigen::MatrixXd& a, double lambda);

// min ||z||_1 s.t. Mz = b. Throws kDegenerateSystem when M lacks full row
// rank; returns kNotConverged with the last iterate when max_iters runs out.
BpSolution SolveBpEquality(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                           const SolverConfig& config = {});

// min ||z||_1 s.t. ||Mz - b||_2 <= radius. radius == 0 defers to
// SolveBpEquality.
BpSolution SolveBpBall(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                       double radius, const SolverConfig& config = {});

struct SolveResult {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd f_hat;
  SolveStatus status = SolveStatus::kNotConverged;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool refined = false;
  // Percent; absent when the instance carries no ground truth.
  std::optional<double> relative_error;

  bool converged() const { return status == SolveStatus::kConverged; }
};

// Program with weight lambda on the corruption. radius == 0 solves the
// equality-constrained form.
SolveResult SolveWeightedCorruption(const ProblemInstance& instance,
                                    double lambda, double radius,
                                    const SolverConfig& config = {});

// min ||x||_1 + ||f||_1 s.t. [theta_a A, theta_i I] [x; f] = b, reported in
// unscaled variables: x_hat = theta_a * x, f_hat = theta_i * f.
SolveResult SolveScaledCorruption(const ProblemInstance& instance,
                                  double theta_a, double theta_i,
                                  const SolverConfig& config = {});

// 100 * ||[x*; f*] - [x_hat; f_hat]||_2 / ||[x*; f*]||_2. Throws
// kUndefinedRelativeError for an all-zero truth.
double RelativeError(const Eigen::VectorXd& truth_x,
                     const Eigen::VectorXd& truth_f,
                     const Eigen::VectorXd& x_hat,
                     const Eigen::VectorXd& f_hat);

struct KktReport {
  bool feasible = false;
  bool passed = false;
  // Strict off-support bound and full column rank on the support: the point
  // is the unique minimizer.
  bool unique = false;
  bool full_column_rank = false;
  double primal_residual = 0.0;
  double sign_residual = 0.0;
  double off_support_max = 0.0;
  std::vector<int> support;
  Eigen::VectorXd witness;
};

// Optimality check for min ||z||_1 s.t. Mz = b. The witness h is the
// least-squares fit of M_S^T h = sgn(z_S), taken as the minimal correction of
// `witness_hint` when one is given (and of zero otherwise).
KktReport KktCheck(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& z, double tol,
                   const Eigen::VectorXd* witness_hint = nullptr);

// Optimality check for the ball-constrained program: on the active ball
// sgn(z_S) = -mu M_S^T (Mz - b) for some mu > 0 and the same scaled vector
// stays within [-1, 1] off the support.
KktReport KktCheckBall(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                       double radius, const Eigen::VectorXd& z, double tol);

inline double SoftThreshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

}  // namespace cscorr

#endif  // CSCORR_BP_SOLVER_H_
