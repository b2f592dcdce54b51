#include "cscorr/rip.h"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "cscorr/error.h"
#include "cscorr/random.h"

namespace cscorr {

namespace {

// C(n, k), saturating at the uint64 maximum.
std::uint64_t Binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(r);
}

// All k-subsets of [n] in lexicographic order, flattened.
std::vector<int> AllCombinations(int n, int k) {
  std::vector<int> out;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    out.insert(out.end(), c.begin(), c.end());
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

class PairEvaluator {
 public:
  explicit PairEvaluator(const Eigen::MatrixXd& a_tilde)
      : a_(a_tilde), gram_(a_tilde.transpose() * a_tilde) {}

  double Delta(const int* t, int s1, const int* v, int s2) const {
    const int k = s1 + s2;
    if (k == 0) return 0.0;
    if (k <= kSmall) {
      SmallMatrix g(k, k);
      Fill(t, s1, v, s2, &g);
      return Extremes(g);
    }
    Eigen::MatrixXd g(k, k);
    Fill(t, s1, v, s2, &g);
    return Extremes(g);
  }

 private:
  static constexpr int kSmall = 12;
  using SmallMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kSmall, kSmall>;

  template <typename Matrix>
  void Fill(const int* t, int s1, const int* v, int s2, Matrix* g) const {
    for (int i = 0; i < s1; ++i) {
      for (int j = 0; j < s1; ++j) (*g)(i, j) = gram_(t[i], t[j]);
      for (int j = 0; j < s2; ++j) {
        (*g)(i, s1 + j) = a_(v[j], t[i]);
        (*g)(s1 + j, i) = a_(v[j], t[i]);
      }
    }
    g->bottomRightCorner(s2, s2).setIdentity();
  }

  template <typename Matrix>
  static double Extremes(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    return std::max(ev(ev.size() - 1) - 1.0, 1.0 - ev(0));
  }

  const Eigen::MatrixXd& a_;
  Eigen::MatrixXd gram_;
};

struct Best {
  double delta = -1.0;
  std::uint64_t index = 0;
};

void ClampSizes(const Eigen::MatrixXd& a_tilde, int* s1, int* s2) {
  if (a_tilde.size() == 0) {
    throw Error(ErrorCode::kInvalidSpec, "empty matrix");
  }
  if (*s1 < 0 || *s2 < 0) {
    throw Error(ErrorCode::kInvalidSpec, "support sizes must be >= 0");
  }
  *s1 = std::min<int>(*s1, a_tilde.cols());
  *s2 = std::min<int>(*s2, a_tilde.rows());
}

}  // namespace

const char* RipModeName(RipMode mode) {
  return mode == RipMode::kExact ? "exact" : "randomized_lower_bound";
}

RipEstimate GeneralizedRipExact(const Eigen::MatrixXd& a_tilde, int s1, int s2,
                                std::uint64_t cap, int workers) {
  ClampSizes(a_tilde, &s1, &s2);
  const int n = static_cast<int>(a_tilde.cols());
  const int m = static_cast<int>(a_tilde.rows());
  const std::uint64_t nt = Binomial(n, s1);
  const std::uint64_t nv = Binomial(m, s2);
  if (nv != 0 && nt > cap / nv) {
    throw Error(ErrorCode::kTooLarge,
                "C(" + std::to_string(n) + "," + std::to_string(s1) + ")*C(" +
                    std::to_string(m) + "," + std::to_string(s2) +
                    ") support pairs exceed the cap of " + std::to_string(cap) +
                    "; use the sampled estimate");
  }
  const std::uint64_t total = nt * nv;
  const std::vector<int> ts = AllCombinations(n, s1);
  const std::vector<int> vs = AllCombinations(m, s2);
  const PairEvaluator eval(a_tilde);

  if (workers <= 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), total));
  std::vector<Best> partial(workers);
  auto run = [&](int w) {
    const std::uint64_t begin = total * w / workers;
    const std::uint64_t end = total * (w + 1) / workers;
    Best best;
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const std::uint64_t it = idx / nv;
      const std::uint64_t iv = idx % nv;
      const double d =
          eval.Delta(ts.data() + it * s1, s1, vs.data() + iv * s2, s2);
      if (d > best.delta) best = {d, idx};
    }
    partial[w] = best;
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& th : pool) th.join();

  // Chunks are in index order, so a strict comparison keeps the smallest
  // index among ties.
  Best best;
  for (const Best& b : partial) {
    if (b.delta > best.delta) best = b;
  }
  RipEstimate est;
  est.s1 = s1;
  est.s2 = s2;
  est.mode = RipMode::kExact;
  est.pairs_evaluated = total;
  est.delta = std::max(0.0, best.delta);
  const std::uint64_t it = best.index / nv;
  const std::uint64_t iv = best.index % nv;
  est.argmax_supports.first.assign(ts.begin() + it * s1,
                                   ts.begin() + (it + 1) * s1);
  est.argmax_supports.second.assign(vs.begin() + iv * s2,
                                    vs.begin() + (iv + 1) * s2);
  return est;
}

RipEstimate GeneralizedRipSampled(const Eigen::MatrixXd& a_tilde, int s1,
                                  int s2, int trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::kInvalidSpec, "trials must be >= 1");
  ClampSizes(a_tilde, &s1, &s2);
  const int n = static_cast<int>(a_tilde.cols());
  const int m = static_cast<int>(a_tilde.rows());
  const std::uint64_t nt = Binomial(n, s1);
  const std::uint64_t nv = Binomial(m, s2);
  if (nv != 0 && nt <= std::numeric_limits<std::uint64_t>::max() / nv &&
      nt * nv <= static_cast<std::uint64_t>(trials)) {
    RipEstimate est = GeneralizedRipExact(a_tilde, s1, s2, nt * nv, 1);
    est.mode = RipMode::kRandomizedLowerBound;
    return est;
  }

  const PairEvaluator eval(a_tilde);
  Rng rng = MakeRng(seed);
  std::vector<int> cols(n), rows(m);
  std::iota(cols.begin(), cols.end(), 0);
  std::iota(rows.begin(), rows.end(), 0);
  RipEstimate est;
  est.s1 = s1;
  est.s2 = s2;
  est.mode = RipMode::kRandomizedLowerBound;
  est.pairs_evaluated = trials;
  double best = -1.0;
  std::vector<int> t, v;
  for (int k = 0; k < trials; ++k) {
    t.clear();
    v.clear();
    std::sample(cols.begin(), cols.end(), std::back_inserter(t), s1, rng);
    std::sample(rows.begin(), rows.end(), std::back_inserter(v), s2, rng);
    const double d = eval.Delta(t.data(), s1, v.data(), s2);
    if (d > best) {
      best = d;
      est.argmax_supports = {t, v};
    }
  }
  est.delta = std::max(0.0, best);
  return est;
}

double LemmaB1Bound(double delta, double noise_radius) {
  if (!(delta >= 0.0 && delta < 1.0 / 18.0)) {
    throw Error(ErrorCode::kBoundInapplicable,
                "stability bound needs 0 <= delta < 1/18, got " +
                    std::to_string(delta));
  }
  if (!(noise_radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "noise_radius must be >= 0");
  }
  return 4.0 * std::sqrt(13.0 + 13.0 * delta) / (1.0 - 9.0 * delta) *
         noise_radius;
}

std::pair<double, double> SingularValueRange(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) {
    throw Error(ErrorCode::kInvalidSpec, "empty matrix");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const Eigen::VectorXd& s = svd.singularValues();
  return {s(s.size() - 1), s(0)};
}

}  // namespace cscorr
