#include "cscorr/theory_bounds.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace cscorr {
namespace {

TheoryConfig DeskConfig() {
  TheoryConfig c;
  c.n = 128;
  c.m = 115;
  c.sx_size = 8;
  c.sf_size = 11;
  return c;
}

TEST(Thm21Budgets, DeskExample) {
  const Thm21Budgets b = ComputeThm21Budgets(DeskConfig());
  EXPECT_EQ(b.sx_max, 7);
  EXPECT_EQ(b.sf_max, 28);
  EXPECT_NEAR(b.lambda, 1.0 / std::sqrt(std::log(std::exp(1.0) * 16.0)), 1e-15);
}

TEST(Thm21Budgets, UnitLogArgument) {
  // e n / sx = e when n = sx.
  EXPECT_NEAR(LambdaTheorem21(7, 7), 1.0, 1e-15);
  EXPECT_NEAR(LambdaTheorem21(19, 7), 1.0 / std::sqrt(1.0 + std::log(19.0 / 7.0)),
              1e-15);
  EXPECT_NEAR(LambdaExperiment(128, 8), 1.0 / std::sqrt(std::log(16.0)), 1e-15);
}

TEST(Thm21Budgets, SmallMeasurementCount) {
  TheoryConfig c = DeskConfig();
  c.m = 3;
  c.sx_size = 1;
  c.sf_size = 1;
  EXPECT_EQ(ComputeThm21Budgets(c).sf_max, 0);
}

TEST(Thm22Conditions, DeskDeficitReported) {
  TheoryConfig c = DeskConfig();
  c.c_1 = EvaluateThm22Conditions(c).c_1_min;
  const Thm22Conditions r = EvaluateThm22Conditions(c);
  const double lg = std::log(25600.0);
  const double t1 = c.c_1 * 8.0 * lg;
  const double t2 = 3.4 * 4.0 * 11.0 / 104.0 * lg;
  const double t3 = 8.0 / (3.0 * 0.05) * (56.0 + 2.0 * std::log(200.0));
  const int required = 11 + static_cast<int>(std::ceil(std::max({t1, t2, t3})));
  EXPECT_NEAR(c.c_1, std::max({3672 * 0.5, 94 / 0.05, 8 * 4.0 * 11 / (0.05 * 104),
                               158 * 4.0 * 11 / 104, 79 * 0.5 / 8}),
              1e-12);
  EXPECT_FALSE(r.measurement_condition_met);
  EXPECT_EQ(r.m_required, required);
  EXPECT_EQ(r.m_deficit, required - 115);
  EXPECT_TRUE(r.c_1_ok);
  for (const auto& t : r.measurement_terms) EXPECT_GE(t.value, 0.0);
}

TEST(Thm22Conditions, MonotoneInMeasurements) {
  TheoryConfig c = DeskConfig();
  c.c_1 = 1.0;
  c.c_tilde = 5.0;
  bool met = false;
  for (int m = 20; m <= 2000; m += 20) {
    c.m = m;
    const bool now = EvaluateThm22Conditions(c).measurement_condition_met;
    EXPECT_FALSE(met && !now) << "m = " << m;
    met = now;
  }
  EXPECT_TRUE(met);
}

TEST(Thm22Conditions, EpsilonTowardOne) {
  TheoryConfig c = DeskConfig();
  c.epsilon_prob = 1.0 - 1e-9;
  EXPECT_NEAR(EvaluateThm22Conditions(c).log_term, std::log(256.0), 1e-8);
  c.epsilon_prob = 0.5;
  const double mid = EvaluateThm22Conditions(c).log_term;
  c.epsilon_prob = 0.01;
  EXPECT_LT(mid, EvaluateThm22Conditions(c).log_term);
}

TEST(Thm22Conditions, BothConstantReadingsReported) {
  const Thm22Conditions r = EvaluateThm22Conditions(DeskConfig());
  EXPECT_NEAR(r.c_i_min_ctilde_reading,
              std::max(std::sqrt(8 * 0.05), std::sqrt(40 * 0.5 / 11)), 1e-15);
  EXPECT_NEAR(r.c_i_min_c_reading,
              std::max(std::sqrt(8 * 0.5), std::sqrt(40 * 0.5 / 11)), 1e-15);
}

TEST(Thm22Probabilities, FirstTermIsOneMinusEpsilon) {
  EXPECT_EQ(EvaluateThm22Probabilities(DeskConfig()).p_du[0], 0.99);
}

TEST(Thm22Probabilities, DeskValueRawNegative) {
  const Thm22Probabilities p = EvaluateThm22Probabilities(DeskConfig());
  EXPECT_NEAR(p.p_dh[0], 1.0 - 2.0 * std::exp(-0.65) - 0.01, 1e-15);
  EXPECT_NEAR(p.p_dh[0], -0.054, 5e-4);
  EXPECT_LT(p.total_lower_bound, 0.0);
}

TEST(Thm22Probabilities, LimitsApproachOne) {
  TheoryConfig c;
  c.n = 1000;
  c.m = 2000000;
  c.sx_size = 200;
  c.sf_size = 10;
  c.epsilon_prob = 1e-12;
  const Thm22Probabilities p = EvaluateThm22Probabilities(c);
  for (double v : p.p_du) EXPECT_NEAR(v, 1.0, 1e-10);
  for (double v : p.p_dh) EXPECT_NEAR(v, 1.0, 1e-10);
  EXPECT_NEAR(p.total_lower_bound, 1.0, 1e-9);
}

TEST(Thm22Probabilities, MonotoneInGapAndSparsity) {
  TheoryConfig c = DeskConfig();
  Thm22Probabilities prev = EvaluateThm22Probabilities(c);
  for (int m = 120; m <= 400; m += 40) {
    c.m = m;
    const Thm22Probabilities p = EvaluateThm22Probabilities(c);
    for (int i = 0; i < 4; ++i) EXPECT_GE(p.p_du[i], prev.p_du[i]);
    for (int i = 0; i < 3; ++i) EXPECT_GE(p.p_dh[i], prev.p_dh[i]);
    prev = p;
  }
  c = DeskConfig();
  prev = EvaluateThm22Probabilities(c);
  c.sx_size = 9;
  const Thm22Probabilities more = EvaluateThm22Probabilities(c);
  EXPECT_GE(more.p_du[3], prev.p_du[3]);
  EXPECT_GE(more.p_dh[2], prev.p_dh[2]);
}

}  // namespace
}  // namespace cscorr
