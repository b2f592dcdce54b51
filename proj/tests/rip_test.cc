#include "cscorr/rip.h"

#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>

#include "cscorr/error.h"
#include "cscorr/problem_gen.h"
#include "cscorr/random.h"

namespace cscorr {
namespace {

Eigen::MatrixXd Random6x8(std::uint64_t seed) {
  return GenerateSensingMatrix({EnsembleKind::kGaussianIid, 6, 8, seed}) /
         std::sqrt(6.0);
}

TEST(GeneralizedRipExact, OrthonormalColumnsNoCorruption) {
  const Eigen::MatrixXd g =
      GenerateSensingMatrix({EnsembleKind::kGaussianIid, 7, 4, 1});
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g)
                                .householderQ() *
                            Eigen::MatrixXd::Identity(7, 4);
  EXPECT_LT(GeneralizedRipExact(q, 3, 0).delta, 1e-12);
}

TEST(GeneralizedRipExact, IdentityGivesOne) {
  const RipEstimate e =
      GeneralizedRipExact(Eigen::MatrixXd::Identity(5, 5), 1, 1);
  EXPECT_EQ(e.delta, 1.0);
  EXPECT_EQ(e.argmax_supports.first, e.argmax_supports.second);
}

TEST(GeneralizedRipExact, MonotoneInSupportSizes) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd a = Random6x8(seed);
    for (int s1 = 0; s1 < 3; ++s1) {
      for (int s2 = 0; s2 < 3; ++s2) {
        const double d = GeneralizedRipExact(a, s1, s2).delta;
        EXPECT_LE(d, GeneralizedRipExact(a, s1 + 1, s2).delta);
        EXPECT_LE(d, GeneralizedRipExact(a, s1, s2 + 1).delta);
      }
    }
  }
}

TEST(GeneralizedRipExact, InvariantUnderSignFlipAndPermutation) {
  const Eigen::MatrixXd a = Random6x8(9);
  Eigen::MatrixXd b(6, 8);
  for (int j = 0; j < 8; ++j) b.col(j) = (j % 2 ? -1.0 : 1.0) * a.col(7 - j);
  EXPECT_NEAR(GeneralizedRipExact(a, 2, 2).delta,
              GeneralizedRipExact(b, 2, 2).delta, 1e-12);
}

TEST(GeneralizedRipExact, WorkerCountDoesNotChangeResult) {
  const Eigen::MatrixXd a = Random6x8(10);
  const RipEstimate one = GeneralizedRipExact(a, 3, 2, kDefaultRipCap, 1);
  const RipEstimate four = GeneralizedRipExact(a, 3, 2, kDefaultRipCap, 4);
  EXPECT_EQ(one.delta, four.delta);
  EXPECT_EQ(one.argmax_supports, four.argmax_supports);
  EXPECT_EQ(one.pairs_evaluated, 56u * 15u);
}

TEST(GeneralizedRipExact, CapExceeded) {
  try {
    GeneralizedRipExact(Random6x8(1), 4, 3, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(GeneralizedRipSampled, BoundedByExactAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd a = Random6x8(20 + seed);
    const double exact = GeneralizedRipExact(a, 2, 2).delta;
    const RipEstimate s = GeneralizedRipSampled(a, 2, 2, 50, seed);
    EXPECT_LE(s.delta, exact);
    EXPECT_EQ(s.mode, RipMode::kRandomizedLowerBound);
    EXPECT_EQ(s.delta, GeneralizedRipSampled(a, 2, 2, 50, seed).delta);
    EXPECT_EQ(GeneralizedRipSampled(a, 2, 2, 28 * 15, seed).delta, exact);
  }
}

TEST(LemmaB1Bound, Values) {
  EXPECT_NEAR(LemmaB1Bound(0.0, 1.0), 4.0 * std::sqrt(13.0), 1e-14);
  EXPECT_NEAR(LemmaB1Bound(0.0, 1.0), 14.4222, 5e-5);
  EXPECT_EQ(LemmaB1Bound(0.03, 0.0), 0.0);
  const double at = LemmaB1Bound(1.0 / 19.0, 1.0);
  EXPECT_TRUE(std::isfinite(at));
  EXPECT_GT(at, 0.0);
  try {
    LemmaB1Bound(1.0 / 18.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundInapplicable);
  }
}

TEST(SingularValueRange, Examples) {
  const auto id = SingularValueRange(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(id.first, 1.0, 1e-14);
  EXPECT_NEAR(id.second, 1.0, 1e-14);
  const auto d = SingularValueRange(Eigen::Vector2d(3.0, 0.5).asDiagonal());
  EXPECT_NEAR(d.first, 0.5, 1e-14);
  EXPECT_NEAR(d.second, 3.0, 1e-14);
}

TEST(SingularValueRange, GaussianEnvelope) {
  const double lo = std::sqrt(200.0) - 3.0 * std::sqrt(20.0);
  const double hi = std::sqrt(200.0) + 3.0 * std::sqrt(20.0);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto [smin, smax] = SingularValueRange(
        GenerateSensingMatrix({EnsembleKind::kGaussianIid, 200, 20, seed}));
    if (smin >= lo && smax <= hi) ++inside;
  }
  EXPECT_GE(inside, 38);
}

}  // namespace
}  // namespace cscorr
