#ifndef CSCORR_GOLFING_H_
#define CSCORR_GOLFING_H_

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cscorr/problem_gen.h"
#include "cscorr/theory_bounds.h"

namespace cscorr {

struct GolfingParams {
  double theta_a = 1.0;
  double theta_i = 1.0;
  double c_i = 2.0;
  double epsilon_prob = 0.01;
  double c_1 = 1.0;

  void Validate() const;
};

// theta_a = 1 / sqrt(sf_size), theta_i = c_i sqrt(ln(2n / eps)).
GolfingParams ParamsTheorem22(int n, int sf_size, double epsilon_prob,
                              double c_i, double c_1 = 1.0);

// Picks `count` entries of `indices` whose `values` have the smallest
// magnitude, ties to the smaller index. Result is sorted ascending.
std::vector<int> SmallestIndices(std::span<const double> values,
                                 std::span<const int> indices, int count);

struct GolfingState {
  std::array<Eigen::VectorXd, 4> dh;  // length m each
  std::array<Eigen::VectorXd, 4> du;  // length n + m each
  std::array<Eigen::VectorXd, 3> w;   // length |s_x| each
  std::array<std::vector<int>, 3> lambda_sets;
  Eigen::VectorXd h;  // sum of dh
  Eigen::VectorXd u;  // [theta_a A, theta_i I]^T h
  // Coefficient applied in steps 2 and 3, one per step.
  std::array<double, 2> step_coefficients{};
};

// Four-step construction of a dual vector for the scaled program. Supports
// must be sorted and distinct, signs +-1, 2 <= m - |s_f|. Throws
// kDegenerateGram when the step-4 system is (numerically) singular.
GolfingState RunGolfing(const Eigen::MatrixXd& a, const GolfingParams& params,
                        const std::vector<int>& s_x,
                        const Eigen::VectorXd& sigma_x,
                        const std::vector<int>& s_f,
                        const Eigen::VectorXd& sigma_f);

// Step 2 and 3 right-hand sides in closed form:
// (I - |L|^-1 A(L, s_x)^T A(L, s_x)) w.
Eigen::VectorXd GolfingClosedFormStep(const Eigen::MatrixXd& a,
                                      const std::vector<int>& s_x,
                                      const std::vector<int>& lambda_set,
                                      const Eigen::VectorXd& w);

struct CertReport {
  bool cond_hsf = false;
  double hsf_max_deviation = 0.0;  // max |theta_i h(s_f) - sigma_f|
  bool cond_usx = false;
  double usx_max_deviation = 0.0;
  double max_u_off = 0.0;
  bool cond_u_off = false;
  double max_h_off = 0.0;  // theta_i ||h(s_f^c)||_inf
  bool cond_h_off = false;
  std::array<double, 4> per_step_du_off{};
  std::array<double, 4> per_step_du_threshold{};
  std::array<bool, 4> per_step_du_ok{};
  std::array<double, 3> per_step_h_off{};  // steps 2..4, theta_i scaled
  std::array<bool, 3> per_step_h_ok{};
  bool per_step_all_ok = false;
  bool b_full_rank = false;
  double b_sigma_min = 0.0;
  double b_sigma_max = 0.0;
  bool passed = false;
};

CertReport VerifyCertificate(const GolfingState& state,
                             const Eigen::MatrixXd& a,
                             const GolfingParams& params,
                             const std::vector<int>& s_x,
                             const Eigen::VectorXd& sigma_x,
                             const std::vector<int>& s_f,
                             const Eigen::VectorXd& sigma_f,
                             double tol = 1e-8);

struct CertificateEvent {
  std::string name;
  int hits = 0;
  double frequency = 0.0;
  double bound = 0.0;  // theoretical lower bound, raw
};

struct CertificateEventTable {
  int trials = 0;
  int degenerate = 0;  // trials where step 4 failed
  std::vector<CertificateEvent> events;
};

// Fresh matrix, supports and signs per trial, all derived from master_seed.
// Bounds come from EvaluateThm22Probabilities(theory) and the lemma
// statements for the w events.
CertificateEventTable CertificateEventFrequencies(
    EnsembleKind kind, const TheoryConfig& theory, const GolfingParams& params,
    int trials, std::uint64_t master_seed);

}  // namespace cscorr

#endif  // CSCORR_GOLFING_H_
