#include "cscorr/theory_bounds.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cscorr/error.h"

namespace cscorr {

namespace {

const BoundTerm& Largest(const std::vector<BoundTerm>& terms) {
  return *std::max_element(
      terms.begin(), terms.end(),
      [](const BoundTerm& a, const BoundTerm& b) { return a.value < b.value; });
}

}  // namespace

void TheoryConfig::Validate() const {
  if (m < 1 || n < 1 || sx_size < 1 || sf_size < 1) {
    throw Error(ErrorCode::kInvalidSpec,
                "m, n, sx_size and sf_size must all be positive");
  }
  if (sf_size >= m) {
    throw Error(ErrorCode::kInvalidSpec, "sf_size must be < m");
  }
  if (!(epsilon_prob > 0.0 && epsilon_prob < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "epsilon_prob must lie in (0, 1)");
  }
  if (!(c > 0.0) || !(c_tilde > 0.0) || !(c_i > 0.0) || !(c_1 > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "constants must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "alpha must lie in (0, 1)");
  }
}

double LambdaTheorem21(int n, int sx_size) {
  if (n < 1 || sx_size < 1 || sx_size > n) {
    throw Error(ErrorCode::kInvalidSpec, "need 1 <= sx_size <= n");
  }
  return 1.0 / std::sqrt(std::log(std::numbers::e * n / sx_size));
}

double LambdaExperiment(int n, int sx_size) {
  if (n < 1 || sx_size < 1 || sx_size >= n) {
    throw Error(ErrorCode::kInvalidSpec, "need 1 <= sx_size < n");
  }
  return 1.0 / std::sqrt(std::log(static_cast<double>(n) / sx_size));
}

Thm21Budgets ComputeThm21Budgets(const TheoryConfig& config) {
  config.Validate();
  const double log_term =
      std::log(std::numbers::e * config.n / config.sx_size);
  Thm21Budgets budgets;
  budgets.sx_max =
      static_cast<int>(std::floor(config.alpha * config.m / log_term));
  budgets.sf_max = static_cast<int>(std::floor(config.alpha * config.m));
  budgets.lambda = 1.0 / std::sqrt(log_term);
  return budgets;
}

Thm22Conditions EvaluateThm22Conditions(const TheoryConfig& config) {
  config.Validate();
  const double sx = config.sx_size;
  const double sf = config.sf_size;
  const double gap = config.m - config.sf_size;
  const double eps = config.epsilon_prob;
  const double ci2 = config.c_i * config.c_i;
  const double log_term = std::log(2.0 * config.n / eps);

  Thm22Conditions out;
  out.log_term = log_term;

  const double t1 = config.c_1 * sx * log_term;
  const double t2 = 3.4 * ci2 * (sf / gap) * log_term;
  const double t3 =
      8.0 / (3.0 * config.c_tilde) * (7.0 * sx + 2.0 * std::log(2.0 / eps));
  out.measurement_terms = {{"c_1*sx*ln(2n/eps)", t1},
                           {"3.4*c_I^2*sf/(m-sf)*ln(2n/eps)", t2},
                           {"8/(3*c_tilde)*(7*sx+2*ln(2/eps))", t3}};
  const BoundTerm& binding = Largest(out.measurement_terms);
  out.measurement_lhs = gap;
  out.measurement_rhs = binding.value;
  out.measurement_binding = binding.name;
  out.measurement_condition_met = gap >= binding.value;

  // d = m - |s_f| must satisfy d >= t1, d >= t3 and d^2 >= 3.4 c_I^2 |s_f| L.
  const double d_min =
      std::max({t1, t3, std::sqrt(3.4 * ci2 * sf * log_term)});
  int d = static_cast<int>(std::ceil(d_min));
  // Guard against rounding in the square-root term.
  while (d < 1 || d < t1 || d < t3 ||
         static_cast<double>(d) * d < 3.4 * ci2 * sf * log_term) {
    ++d;
  }
  out.m_required = config.sf_size + d;
  out.m_deficit = out.m_required - config.m;

  const double ci_ctilde = std::sqrt(8.0 * config.c_tilde);
  const double ci_c = std::sqrt(8.0 * config.c);
  const double ci_sf = std::sqrt(40.0 * config.c / sf);
  out.c_i_terms = {{"sqrt(8*c_tilde)", ci_ctilde},
                   {"sqrt(8*c)", ci_c},
                   {"sqrt(40*c/sf)", ci_sf}};
  out.c_i_min_ctilde_reading = std::max(ci_ctilde, ci_sf);
  out.c_i_min_c_reading = std::max(ci_c, ci_sf);
  out.c_i_ok_ctilde_reading = config.c_i >= out.c_i_min_ctilde_reading;
  out.c_i_ok_c_reading = config.c_i >= out.c_i_min_c_reading;
  out.c_i_ok = out.c_i_ok_ctilde_reading && out.c_i_ok_c_reading;

  out.c_1_terms = {{"3672*c", 3672.0 * config.c},
                   {"94/c_tilde", 94.0 / config.c_tilde},
                   {"8*c_I^2*sf/(c_tilde*(m-sf))",
                    8.0 * ci2 * sf / (config.c_tilde * gap)},
                   {"158*c_I^2*sf/(m-sf)", 158.0 * ci2 * sf / gap},
                   {"79*c/sx", 79.0 * config.c / sx}};
  const BoundTerm& c1_binding = Largest(out.c_1_terms);
  out.c_1_min = c1_binding.value;
  out.c_1_binding = c1_binding.name;
  out.c_1_ok = config.c_1 >= out.c_1_min;

  out.note =
      "second measurement term has sf/(m-sf) inside a condition on m-sf; "
      "evaluated as stated";
  return out;
}

Thm22Probabilities EvaluateThm22Probabilities(const TheoryConfig& config) {
  config.Validate();
  const double eps = config.epsilon_prob;
  const double n = config.n;
  const double gap = config.m - config.sf_size;
  const double e8 = 2.0 * std::exp(-config.c_tilde * gap / 8.0);
  const double e4 = 2.0 * std::exp(-config.c_tilde * gap / 4.0);
  const double es = 2.0 * std::exp(-static_cast<double>(config.sx_size));

  Thm22Probabilities p;
  p.p_du[0] = 1.0 - eps;
  p.p_du[1] = (1.0 - eps) * (1.0 - e8 - eps);
  p.p_du[2] = (1.0 - eps) * (1.0 - e8 - eps - eps / n);
  p.p_du[3] = (1.0 - eps) * (1.0 - e4 - es - eps - eps / n);
  p.p_dh[0] = 1.0 - e8 - eps;
  p.p_dh[1] = 1.0 - e8 - (n + 1.0) * eps / n;
  p.p_dh[2] = 1.0 - e4 - es - (n + 1.0) * eps / n;

  double total = 1.0;
  for (double v : p.p_du) total -= 1.0 - v;
  for (double v : p.p_dh) total -= 1.0 - v;
  p.total_lower_bound = total;
  return p;
}

}  // namespace cscorr
