#include "cscorr/golfing.h"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cscorr/error.h"
#include "cscorr/random.h"

namespace cscorr {

namespace {

constexpr double kPinvCutoff = 1e-12;

void CheckSupport(const std::vector<int>& support, int dim, const char* name) {
  if (support.empty()) {
    throw Error(ErrorCode::kInvalidSpec, std::string(name) + " is empty");
  }
  for (size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= dim ||
        (k > 0 && support[k] <= support[k - 1])) {
      throw Error(ErrorCode::kInvalidSpec,
                  std::string(name) + " must be sorted, distinct, in range");
    }
  }
}

void CheckSigns(const Eigen::VectorXd& sigma, size_t size, const char* name) {
  if (static_cast<size_t>(sigma.size()) != size) {
    throw Error(ErrorCode::kShape,
                std::string(name) + " length differs from its support");
  }
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) != 1.0 && sigma(i) != -1.0) {
      throw Error(ErrorCode::kInvalidSpec,
                  std::string(name) + " entries must be +1 or -1");
    }
  }
}

std::vector<int> ComplementOf(const std::vector<int>& support, int dim) {
  std::vector<int> rest;
  rest.reserve(dim - support.size());
  size_t k = 0;
  for (int i = 0; i < dim; ++i) {
    if (k < support.size() && support[k] == i) {
      ++k;
    } else {
      rest.push_back(i);
    }
  }
  return rest;
}

// [theta_a A, theta_i I]^T h.
Eigen::VectorXd ScaledAdjoint(const Eigen::MatrixXd& a,
                              const GolfingParams& params,
                              const Eigen::VectorXd& h) {
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();
  Eigen::VectorXd u(n + m);
  u.head(n).noalias() = params.theta_a * (a.transpose() * h);
  u.tail(m) = params.theta_i * h;
  return u;
}

double MaxAbsOver(const Eigen::VectorXd& v, const std::vector<int>& indices) {
  double out = 0.0;
  for (int i : indices) out = std::max(out, std::abs(v(i)));
  return out;
}

}  // namespace

void GolfingParams::Validate() const {
  if (!(theta_a > 0.0) || !(theta_i > 0.0) || !(c_i > 0.0) || !(c_1 > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "golfing constants must be positive");
  }
  if (!(epsilon_prob > 0.0 && epsilon_prob < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "epsilon_prob must lie in (0, 1)");
  }
}

GolfingParams ParamsTheorem22(int n, int sf_size, double epsilon_prob,
                              double c_i, double c_1) {
  if (sf_size < 1) {
    throw Error(ErrorCode::kInvalidSpec,
                "sf_size must be >= 1 (theta_a undefined otherwise)");
  }
  if (n < 1) throw Error(ErrorCode::kInvalidSpec, "n must be >= 1");
  GolfingParams params;
  params.theta_a = 1.0 / std::sqrt(static_cast<double>(sf_size));
  params.c_i = c_i;
  params.epsilon_prob = epsilon_prob;
  params.c_1 = c_1;
  if (!(epsilon_prob > 0.0 && epsilon_prob < 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "epsilon_prob must lie in (0, 1)");
  }
  params.theta_i = c_i * std::sqrt(std::log(2.0 * n / epsilon_prob));
  params.Validate();
  return params;
}

std::vector<int> SmallestIndices(std::span<const double> values,
                                 std::span<const int> indices, int count) {
  if (values.size() != indices.size()) {
    throw Error(ErrorCode::kShape, "values and indices differ in length");
  }
  if (count < 0 || static_cast<size_t>(count) > values.size()) {
    throw Error(ErrorCode::kInvalidSpec,
                "count " + std::to_string(count) + " exceeds set size " +
                    std::to_string(values.size()));
  }
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t l, size_t r) {
    const double al = std::abs(values[l]);
    const double ar = std::abs(values[r]);
    if (al != ar) return al < ar;
    return indices[l] < indices[r];
  });
  std::vector<int> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(indices[order[k]]);
  std::sort(out.begin(), out.end());
  return out;
}

GolfingState RunGolfing(const Eigen::MatrixXd& a, const GolfingParams& params,
                        const std::vector<int>& s_x,
                        const Eigen::VectorXd& sigma_x,
                        const std::vector<int>& s_f,
                        const Eigen::VectorXd& sigma_f) {
  params.Validate();
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  CheckSupport(s_x, n, "s_x");
  CheckSupport(s_f, m, "s_f");
  CheckSigns(sigma_x, s_x.size(), "sigma_x");
  CheckSigns(sigma_f, s_f.size(), "sigma_f");
  const int gap = m - static_cast<int>(s_f.size());
  if (gap < 2) {
    throw Error(ErrorCode::kInvalidSpec, "golfing needs m - |s_f| >= 2");
  }
  const std::vector<int> comp = ComplementOf(s_f, m);
  const int half = gap / 2;

  GolfingState st;
  for (auto& v : st.dh) v = Eigen::VectorXd::Zero(m);

  // Step 1: hit sigma_f on the corruption support.
  st.dh[0](s_f) = sigma_f / params.theta_i;
  st.du[0] = ScaledAdjoint(a, params, st.dh[0]);
  Eigen::VectorXd u = st.du[0];
  st.w[0] = sigma_x - u(s_x);

  // Steps 2 and 3: approach sigma_x on half of the clean rows each.
  const Eigen::MatrixXd a_comp_sx = a(comp, s_x);
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd& w = st.w[k];
    const Eigen::VectorXd scores = params.theta_a * (a_comp_sx * w);
    st.lambda_sets[k] = SmallestIndices(
        std::span<const double>(scores.data(), scores.size()), comp, half);
    const std::vector<int>& lam = st.lambda_sets[k];
    const double coef =
        1.0 / (lam.size() * params.theta_a * params.theta_a);
    st.step_coefficients[k] = coef;
    st.dh[k + 1](lam) = coef * params.theta_a * (a(lam, s_x) * w);
    st.du[k + 1] = ScaledAdjoint(a, params, st.dh[k + 1]);
    u += st.du[k + 1];
    st.w[k + 1] = sigma_x - u(s_x);
  }

  // Step 4: hit sigma_x exactly with the minimum-norm correction on the clean
  // rows, B (B^T B)^-1 w3 = U S^-1 V^T w3.
  st.lambda_sets[2] = comp;
  const Eigen::MatrixXd b = params.theta_a * a_comp_sx;
  if (b.rows() < b.cols()) {
    throw Error(ErrorCode::kDegenerateGram,
                "step-4 Gram is singular: fewer clean rows than |s_x|");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s(s.size() - 1) <= kPinvCutoff * s(0)) {
    throw Error(ErrorCode::kDegenerateGram,
                "step-4 Gram is numerically singular");
  }
  const Eigen::VectorXd coeffs =
      (svd.matrixV().transpose() * st.w[2]).cwiseQuotient(s);
  st.dh[3](comp) = svd.matrixU() * coeffs;
  st.du[3] = ScaledAdjoint(a, params, st.dh[3]);

  st.h = st.dh[0] + st.dh[1] + st.dh[2] + st.dh[3];
  st.u = ScaledAdjoint(a, params, st.h);
  return st;
}

Eigen::VectorXd GolfingClosedFormStep(const Eigen::MatrixXd& a,
                                      const std::vector<int>& s_x,
                                      const std::vector<int>& lambda_set,
                                      const Eigen::VectorXd& w) {
  if (lambda_set.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "empty index set");
  }
  const Eigen::MatrixXd al = a(lambda_set, s_x);
  return w - (al.transpose() * (al * w)) / static_cast<double>(lambda_set.size());
}

CertReport VerifyCertificate(const GolfingState& state,
                             const Eigen::MatrixXd& a,
                             const GolfingParams& params,
                             const std::vector<int>& s_x,
                             const Eigen::VectorXd& sigma_x,
                             const std::vector<int>& s_f,
                             const Eigen::VectorXd& sigma_f, double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  CertReport rep;

  rep.cond_hsf = true;
  for (size_t k = 0; k < s_f.size(); ++k) {
    const double hv = state.h(s_f[k]);
    rep.cond_hsf = rep.cond_hsf && hv == sigma_f(k) / params.theta_i;
    rep.hsf_max_deviation = std::max(
        rep.hsf_max_deviation, std::abs(params.theta_i * hv - sigma_f(k)));
  }

  const Eigen::VectorXd ux = state.u.head(n);
  rep.usx_max_deviation = (ux(s_x) - sigma_x).cwiseAbs().maxCoeff();
  rep.cond_usx = rep.usx_max_deviation <= tol;

  const std::vector<int> sx_c = ComplementOf(s_x, n);
  const std::vector<int> sf_c = ComplementOf(s_f, m);
  rep.max_u_off = MaxAbsOver(ux, sx_c);
  rep.cond_u_off = rep.max_u_off < 1.0;
  rep.max_h_off = params.theta_i * MaxAbsOver(state.h, sf_c);
  rep.cond_h_off = rep.max_h_off < 1.0;

  const double later = (1.0 - 1.0 / std::sqrt(2.0)) / 3.0;
  rep.per_step_all_ok = true;
  for (int i = 0; i < 4; ++i) {
    rep.per_step_du_threshold[i] = i == 0 ? 1.0 / std::sqrt(2.0) : later;
    rep.per_step_du_off[i] =
        MaxAbsOver(Eigen::VectorXd(state.du[i].head(n)), sx_c);
    rep.per_step_du_ok[i] =
        rep.per_step_du_off[i] < rep.per_step_du_threshold[i];
    rep.per_step_all_ok = rep.per_step_all_ok && rep.per_step_du_ok[i];
  }
  for (int i = 0; i < 3; ++i) {
    rep.per_step_h_off[i] = params.theta_i * MaxAbsOver(state.dh[i + 1], sf_c);
    rep.per_step_h_ok[i] = rep.per_step_h_off[i] < 1.0 / 3.0;
    rep.per_step_all_ok = rep.per_step_all_ok && rep.per_step_h_ok[i];
  }

  const Eigen::Index cols = s_x.size() + s_f.size();
  if (cols <= m) {
    Eigen::MatrixXd b(m, cols);
    b.leftCols(s_x.size()) = params.theta_a * a(Eigen::all, s_x);
    b.rightCols(s_f.size()).setZero();
    for (size_t k = 0; k < s_f.size(); ++k) {
      b(s_f[k], s_x.size() + k) = params.theta_i;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    const Eigen::VectorXd& s = svd.singularValues();
    rep.b_sigma_max = s(0);
    rep.b_sigma_min = s(s.size() - 1);
    rep.b_full_rank = rep.b_sigma_min > tol * rep.b_sigma_max;
  }

  rep.passed = rep.cond_hsf && rep.cond_usx && rep.cond_u_off &&
               rep.cond_h_off && rep.b_full_rank;
  return rep;
}

CertificateEventTable CertificateEventFrequencies(
    EnsembleKind kind, const TheoryConfig& theory, const GolfingParams& params,
    int trials, std::uint64_t master_seed) {
  theory.Validate();
  params.Validate();
  if (trials < 1) throw Error(ErrorCode::kInvalidSpec, "trials must be >= 1");
  const int m = theory.m;
  const int n = theory.n;
  const double sx = theory.sx_size;
  const double sf = theory.sf_size;
  const double eps = params.epsilon_prob;

  const Thm22Probabilities p = EvaluateThm22Probabilities(theory);
  const double w1_thr = (1.0 + 1.0 / std::sqrt(2.0)) * std::sqrt(sx);
  const double w3_thr = std::sqrt((m - sf) / sf) /
                        (8.0 * params.c_i * std::sqrt(std::log(2.0 * n / eps)));

  CertificateEventTable table;
  table.trials = trials;
  table.events = {
      {"w1_norm", 0, 0.0, 1.0 - eps},
      {"w2_norm", 0, 0.0, (1.0 - eps) * (1.0 - eps / n)},
      {"w3_norm", 0, 0.0,
       (1.0 - 2.0 * std::exp(-sx)) * (1.0 - eps) * (1.0 - eps / n)},
      {"du1_off", 0, 0.0, p.p_du[0]},
      {"du2_off", 0, 0.0, p.p_du[1]},
      {"du3_off", 0, 0.0, p.p_du[2]},
      {"du4_off", 0, 0.0, p.p_du[3]},
      {"dh2_off", 0, 0.0, p.p_dh[0]},
      {"dh3_off", 0, 0.0, p.p_dh[1]},
      {"dh4_off", 0, 0.0, p.p_dh[2]},
      {"all_per_step", 0, 0.0, p.total_lower_bound},
      {"certificate", 0, 0.0, p.total_lower_bound},
  };

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed =
        DeriveSeed(master_seed, {static_cast<std::uint64_t>(t)});
    const Eigen::MatrixXd a =
        GenerateSensingMatrix({kind, m, n, DeriveSeed(seed, {1})});
    const SparseGroundTruth x =
        GenerateSparseGroundTruth(n, theory.sx_size, 1.0, DeriveSeed(seed, {2}));
    const SparseGroundTruth f = GenerateSparseGroundTruth(
        m, theory.sf_size, 10.0, DeriveSeed(seed, {3}));
    GolfingState st;
    try {
      st = RunGolfing(a, params, x.support, x.Signs(), f.support, f.Signs());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGram) throw;
      ++table.degenerate;
      continue;
    }
    const CertReport rep = VerifyCertificate(st, a, params, x.support,
                                             x.Signs(), f.support, f.Signs());
    const bool hit[] = {
        st.w[0].norm() < w1_thr,  st.w[1].norm() < 0.25,
        st.w[2].norm() <= w3_thr, rep.per_step_du_ok[0],
        rep.per_step_du_ok[1],    rep.per_step_du_ok[2],
        rep.per_step_du_ok[3],    rep.per_step_h_ok[0],
        rep.per_step_h_ok[1],     rep.per_step_h_ok[2],
        rep.per_step_all_ok,      rep.passed,
    };
    for (size_t e = 0; e < table.events.size(); ++e) {
      if (hit[e]) ++table.events[e].hits;
    }
  }
  for (auto& e : table.events) {
    e.frequency = static_cast<double>(e.hits) / trials;
  }
  return table;
}

}  // namespace cscorr
