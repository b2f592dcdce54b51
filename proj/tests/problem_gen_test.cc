#include "cscorr/problem_gen.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <cmath>
#include <map>
#include <vector>

#include "cscorr/error.h"
#include "cscorr/random.h"

namespace cscorr {
namespace {

TEST(SensingMatrix, DeterministicFromSeed) {
  const EnsembleSpec spec{EnsembleKind::kGaussianIid, 3, 2, 7};
  const Eigen::MatrixXd a = GenerateSensingMatrix(spec);
  const Eigen::MatrixXd b = GenerateSensingMatrix(spec);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
}

TEST(SensingMatrix, RademacherEntriesAreSigns) {
  const Eigen::MatrixXd a =
      GenerateSensingMatrix({EnsembleKind::kRademacherIid, 40, 30, 3});
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a.data()[i] == 1.0 || a.data()[i] == -1.0);
  }
}

TEST(SensingMatrix, ZeroDimensionRejected) {
  try {
    GenerateSensingMatrix({EnsembleKind::kGaussianIid, 0, 3, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
  }
}

TEST(SensingMatrix, DctBasisIsOrthonormal) {
  const Eigen::MatrixXd psi = DctBasis(16);
  EXPECT_LT((psi * psi.transpose() - Eigen::MatrixXd::Identity(16, 16))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(SensingMatrix, IsotropyGaussianWideSample) {
  for (EnsembleKind kind :
       {EnsembleKind::kGaussianIid, EnsembleKind::kRademacherIid,
        EnsembleKind::kGaussianTimesOrthobasis}) {
    const IsotropyReport rep = IsotropyDiagnostic({kind, 2000, 8, 11}, 20);
    EXPECT_EQ(rep.directions.size(), 20u);
    // At 3 standard errors a single miss among 20 is plausible; more is not.
    EXPECT_LE(rep.violations, 1) << EnsembleKindName(kind);
  }
}

TEST(SparseGroundTruth, EmptySupport) {
  const SparseGroundTruth t = GenerateSparseGroundTruth(10, 0, 1.0, 1);
  EXPECT_TRUE(t.support.empty());
  EXPECT_EQ(t.Dense(), Eigen::VectorXd::Zero(10));
}

TEST(SparseGroundTruth, ExactSupportSizeNonzeroValues) {
  const SparseGroundTruth t = GenerateSparseGroundTruth(128, 8, 1.0, 5);
  ASSERT_EQ(t.support.size(), 8u);
  EXPECT_TRUE(std::is_sorted(t.support.begin(), t.support.end()));
  for (double v : t.values) EXPECT_NE(v, 0.0);
  EXPECT_EQ((t.Dense().array() != 0.0).count(), 8);
}

TEST(SparseGroundTruth, SparsityAboveDimensionRejected) {
  EXPECT_THROW(GenerateSparseGroundTruth(3, 4, 1.0, 1), Error);
}

TEST(SparseGroundTruth, SupportUniformChiSquare) {
  constexpr int kDraws = 10000;
  std::map<std::vector<int>, int> counts;
  for (int d = 0; d < kDraws; ++d) {
    ++counts[GenerateSparseGroundTruth(6, 2, 1.0, DeriveSeed(99, {
                                                      static_cast<std::uint64_t>(d)}))
                 .support];
  }
  ASSERT_EQ(counts.size(), 15u);
  const double expected = kDraws / 15.0;
  double stat = 0.0;
  for (const auto& [support, c] : counts) {
    stat += (c - expected) * (c - expected) / expected;
  }
  // Upper 1% point of chi-square with 14 degrees of freedom.
  EXPECT_LT(stat, 29.141237740672796);
}

TEST(AssembleMeasurements, ZeroDataGivesZero) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 3);
  const ProblemInstance p = AssembleMeasurements(
      a, GenerateSparseGroundTruth(3, 0, 1.0, 1),
      GenerateSparseGroundTruth(4, 0, 1.0, 2), Eigen::VectorXd::Zero(4));
  EXPECT_EQ(p.measurements, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(p.noise_radius, 0.0);
}

TEST(AssembleMeasurements, IdentityWithUnitVectors) {
  SparseGroundTruth x{3, {0}, {1.0}, 1.0};
  SparseGroundTruth f{3, {1}, {1.0}, 1.0};
  const ProblemInstance p = AssembleMeasurements(
      Eigen::MatrixXd::Identity(3, 3), x, f, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(p.measurements, Eigen::Vector3d(1.0, 1.0, 0.0));
}

TEST(AssembleMeasurements, RowByRowRecompute) {
  const int m = 30, n = 50;
  const Eigen::MatrixXd a =
      GenerateSensingMatrix({EnsembleKind::kGaussianIid, m, n, 4});
  const auto x = GenerateSparseGroundTruth(n, 5, 1.0, 5);
  const auto f = GenerateSparseGroundTruth(m, 3, 10.0, 6);
  const Eigen::VectorXd v = GenerateDenseNoise(m, 0.01, 7);
  const ProblemInstance p = AssembleMeasurements(a, x, f, v);
  EXPECT_NEAR(p.noise_radius, 0.01, 1e-15);
  const Eigen::VectorXd xd = x.Dense(), fd = f.Dense();
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a(i, j) * xd(j);
    worst = std::max(worst, std::abs(p.measurements(i) - (s + fd(i) + v(i))));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(AssembleMeasurements, ShapeMismatch) {
  try {
    AssembleMeasurements(Eigen::MatrixXd::Zero(4, 3),
                         GenerateSparseGroundTruth(2, 0, 1.0, 1),
                         GenerateSparseGroundTruth(4, 0, 1.0, 2),
                         Eigen::VectorXd::Zero(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

std::vector<double> NormalSamples(int count, std::uint64_t seed) {
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> s(count);
  for (double& v : s) v = normal(rng);
  return s;
}

TEST(TailDiagnostic, GaussianNoFlag) {
  const auto samples = NormalSamples(10000, 21);
  const std::vector<double> w = {1.0}, t = {0.0, 1.0, 2.0, 3.0};
  const TailReport rep = SubgaussianTailDiagnostic(samples, w, 0.5, t);
  EXPECT_FALSE(rep.any_flagged);
  EXPECT_DOUBLE_EQ(rep.points[0].bound, 2.0);
  EXPECT_LE(rep.points[0].frequency, 1.0);
  // The bound dominates the exact Gaussian tail 2 Q(t).
  for (size_t k = 1; k < t.size(); ++k) {
    EXPECT_GE(rep.points[k].bound, std::erfc(t[k] / std::sqrt(2.0)));
  }
}

TEST(TailDiagnostic, RademacherNoFlag) {
  Rng rng = MakeRng(22);
  std::vector<double> samples(10000 * 4);
  for (double& s : samples) s = (rng() >> 63) ? 1.0 : -1.0;
  const std::vector<double> w = {0.5, -0.5, 0.5, 0.5}, t = {1.0, 2.0, 3.0};
  EXPECT_FALSE(SubgaussianTailDiagnostic(samples, w, 0.5, t).any_flagged);
}

TEST(TailDiagnostic, EmptyInputRejected) {
  const std::vector<double> empty, w = {1.0}, t = {1.0};
  EXPECT_THROW(SubgaussianTailDiagnostic(empty, w, 0.5, t), Error);
}

TEST(ConcentrationDiagnostic, SingleRowMatchesChiSquare) {
  const ConcentrationReport rep =
      ConcentrationDiagnostic({EnsembleKind::kGaussianIid, 1, 8, 31}, 10000, 0.5);
  // P(|g^2 - 1| >= 0.5) = P(g^2 >= 1.5) + P(g^2 <= 0.5).
  const double exact = std::erfc(std::sqrt(0.75)) + std::erf(0.5);
  const double se = std::sqrt(exact * (1.0 - exact) / 10000);
  EXPECT_NEAR(rep.frequency, exact, 3.0 * se);
}

TEST(ConcentrationDiagnostic, LargeRowsBelowBound) {
  const ConcentrationReport rep =
      ConcentrationDiagnostic({EnsembleKind::kGaussianIid, 500, 8, 32}, 200, 0.3);
  EXPECT_NEAR(rep.bound, 2.0 * std::exp(-0.05 * 0.09 * 500), 1e-15);
  EXPECT_LE(rep.frequency, rep.bound);
  const ConcentrationReport near_one =
      ConcentrationDiagnostic({EnsembleKind::kGaussianIid, 500, 8, 33}, 200, 0.99);
  EXPECT_EQ(near_one.frequency, 0.0);
}

TEST(ConcentrationDiagnostic, DeviationOutsideUnitIntervalRejected) {
  EXPECT_THROW(
      ConcentrationDiagnostic({EnsembleKind::kGaussianIid, 5, 3, 1}, 100, 1.0),
      Error);
  EXPECT_THROW(
      ConcentrationDiagnostic({EnsembleKind::kGaussianIid, 5, 3, 1}, 100, 0.0),
      Error);
}

}  // namespace
}  // namespace cscorr
