#ifndef CSCORR_RIP_H_
#define CSCORR_RIP_H_

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

namespace cscorr {

enum class RipMode { kExact, kRandomizedLowerBound };

const char* RipModeName(RipMode mode);

struct RipEstimate {
  int s1 = 0;
  int s2 = 0;
  double delta = 0.0;
  // Column supports (T in [n], V in [m]) attaining delta.
  std::pair<std::vector<int>, std::vector<int>> argmax_supports;
  RipMode mode = RipMode::kExact;
  // Support pairs examined.
  std::uint64_t pairs_evaluated = 0;
};

constexpr std::uint64_t kDefaultRipCap = 2000000;

// Generalized restricted isometry constant of [a_tilde, I_m] over column
// supports of size s1 among the first n columns and s2 among the identity
// columns (sizes clamped to n and m). Throws kTooLarge when the number of
// support pairs exceeds `cap`. `workers` <= 0 uses the hardware concurrency.
RipEstimate GeneralizedRipExact(const Eigen::MatrixXd& a_tilde, int s1, int s2,
                                std::uint64_t cap = kDefaultRipCap,
                                int workers = 1);

// Maximum over `trials` uniformly drawn support pairs: a lower bound on the
// exact constant. Enumerates every pair when trials reaches their number.
RipEstimate GeneralizedRipSampled(const Eigen::MatrixXd& a_tilde, int s1,
                                  int s2, int trials, std::uint64_t seed);

// Error bound 4 sqrt(13 + 13 delta) / (1 - 9 delta) * noise_radius; throws
// kBoundInapplicable unless 0 <= delta < 1/18.
double LemmaB1Bound(double delta, double noise_radius);

// (sigma_min, sigma_max) over min(rows, cols) singular values.
std::pair<double, double> SingularValueRange(const Eigen::MatrixXd& matrix);

}  // namespace cscorr

#endif  // CSCORR_RIP_H_
