#ifndef CSCORR_THEORY_BOUNDS_H_
#define CSCORR_THEORY_BOUNDS_H_

#include <array>
#include <string>
#include <vector>

namespace cscorr {

struct TheoryConfig {
  int m = 0;
  int n = 0;
  int sx_size = 0;
  int sf_size = 0;
  // Probability parameter of the scaled-program guarantee.
  double epsilon_prob = 0.01;
  // Subgaussian parameter; 1/2 for the standard normal.
  double c = 0.5;
  // Concentration constant of ||Ax||^2 / m. Not fixed by theory; a
  // calibration knob.
  double c_tilde = 0.05;
  double c_i = 2.0;
  double c_1 = 1.0;
  double alpha = 0.25;

  void Validate() const;
};

// 1 / sqrt(ln(e n / s)), the weight rule of the stable-recovery theorem.
double LambdaTheorem21(int n, int sx_size);
// 1 / sqrt(ln(n / s)), the weight used in the phase-transition experiment.
double LambdaExperiment(int n, int sx_size);

struct Thm21Budgets {
  int sx_max = 0;
  int sf_max = 0;
  double lambda = 0.0;
};

Thm21Budgets ComputeThm21Budgets(const TheoryConfig& config);

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct Thm22Conditions {
  double log_term = 0.0;  // ln(2n / eps)

  // m - |s_f| against max{c_1 |s_x| L, 3.4 c_I^2 |s_f|/(m-|s_f|) L,
  // (8 / (3 c~)) (7 |s_x| + 2 ln(2/eps))}.
  std::vector<BoundTerm> measurement_terms;
  double measurement_lhs = 0.0;
  double measurement_rhs = 0.0;
  std::string measurement_binding;
  bool measurement_condition_met = false;
  // Smallest m meeting the condition with |s_f| held fixed, and m_required - m
  // (positive when the condition fails).
  int m_required = 0;
  int m_deficit = 0;

  // Lower bounds on c_I. The first term is evaluated both as sqrt(8 c~) and as
  // sqrt(8 c); c_i_ok requires both readings.
  std::vector<BoundTerm> c_i_terms;
  double c_i_min_ctilde_reading = 0.0;
  double c_i_min_c_reading = 0.0;
  bool c_i_ok_ctilde_reading = false;
  bool c_i_ok_c_reading = false;
  bool c_i_ok = false;

  // Five-term lower bound on c_1.
  std::vector<BoundTerm> c_1_terms;
  double c_1_min = 0.0;
  std::string c_1_binding;
  bool c_1_ok = false;

  // The second measurement term carries |s_f| / (m - |s_f|) inside a condition
  // on m - |s_f|; reproduced as stated and flagged here.
  std::string note;
};

Thm22Conditions EvaluateThm22Conditions(const TheoryConfig& config);

struct Thm22Probabilities {
  std::array<double, 4> p_du{};  // i = 1..4
  std::array<double, 3> p_dh{};  // i = 2..4
  // 1 - sum(1 - p_du) - sum(1 - p_dh); never clamped.
  double total_lower_bound = 0.0;
};

Thm22Probabilities EvaluateThm22Probabilities(const TheoryConfig& config);

}  // namespace cscorr

#endif  // CSCORR_THEORY_BOUNDS_H_
