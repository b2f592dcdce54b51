#include "cscorr/bp_solver.h"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cscorr/error.h"

namespace cscorr {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kTiny = 1e-300;

// Residual balancing: rescale rho when one residual dominates the other by
// more than this factor.
constexpr double kBalanceRatio = 10.0;
constexpr int kBalanceEvery = 10;

// Euclidean projection onto {z : Mz = b} from a pivoted QR of M^T, i.e.
// M^T P = Q R. Every feasible z satisfies Q^T z = R^-T P^T b.
class AffineProjector {
 public:
  AffineProjector(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    if (rows > cols) {
      throw Error(ErrorCode::kDegenerateSystem,
                  "a " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " system cannot have full row rank");
    }
    qr_.setThreshold(kRankCutoff);
    qr_.compute(m.transpose());
    if (qr_.rank() < rows) {
      throw Error(ErrorCode::kDegenerateSystem,
                  "matrix has rank " + std::to_string(qr_.rank()) + " < " +
                      std::to_string(rows) + " rows");
    }
    q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
    r_ = qr_.matrixR().topLeftCorner(rows, rows).triangularView<Eigen::Upper>();
    const Eigen::VectorXd pb = qr_.colsPermutation().transpose() * b;
    c_ = r_.transpose().triangularView<Eigen::Lower>().solve(pb);
    tmp_.resize(rows);
  }

  void Project(const Eigen::VectorXd& v, Eigen::VectorXd* out) {
    tmp_.noalias() = q_.transpose() * v;
    tmp_ -= c_;
    *out = v;
    out->noalias() -= q_ * tmp_;
  }

  Eigen::VectorXd MinNormPoint() const { return q_ * c_; }

  // h with M^T h = lambda, for lambda in the range of M^T.
  Eigen::VectorXd DualFromRange(const Eigen::VectorXd& lambda) const {
    const Eigen::VectorXd t =
        r_.triangularView<Eigen::Upper>().solve(q_.transpose() * lambda);
    return qr_.colsPermutation() * t;
  }

 private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd c_;
  Eigen::VectorXd tmp_;
};

void SoftThresholdInPlace(double threshold, Eigen::VectorXd* v) {
  for (Eigen::Index i = 0; i < v->size(); ++i) {
    (*v)(i) = SoftThreshold((*v)(i), threshold);
  }
}

std::vector<int> DetectSupport(const Eigen::VectorXd& z, double rel_tol) {
  std::vector<int> support;
  if (z.size() == 0) return support;
  const double cutoff = rel_tol * z.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0 && std::abs(z(i)) > cutoff) {
      support.push_back(static_cast<int>(i));
    }
  }
  return support;
}

std::vector<int> Complement(const std::vector<int>& support, int size) {
  std::vector<int> rest;
  rest.reserve(size - support.size());
  size_t k = 0;
  for (int i = 0; i < size; ++i) {
    if (k < support.size() && support[k] == i) {
      ++k;
    } else {
      rest.push_back(i);
    }
  }
  return rest;
}

Eigen::VectorXd SignsOn(const Eigen::VectorXd& z,
                        const std::vector<int>& support) {
  Eigen::VectorXd s(support.size());
  for (size_t k = 0; k < support.size(); ++k) {
    s(k) = z(support[k]) > 0 ? 1.0 : -1.0;
  }
  return s;
}

// Decides when to attempt a polish: the support has to be stable for a while,
// and attempts on an unchanged support back off geometrically.
class PolishSchedule {
 public:
  bool Update(const Eigen::VectorXd& z) {
    bool same = static_cast<size_t>(z.size()) == pattern_.size();
    if (same) {
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const signed char sign = z(i) > 0 ? 1 : (z(i) < 0 ? -1 : 0);
        if (sign != pattern_[i]) {
          same = false;
          break;
        }
      }
    }
    if (!same) {
      pattern_.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        pattern_[i] = z(i) > 0 ? 1 : (z(i) < 0 ? -1 : 0);
      }
      stable_ = 0;
      next_ = 8;
      return false;
    }
    ++stable_;
    if (stable_ >= next_) {
      next_ = std::min(next_ * 4, next_ + 1024);
      return true;
    }
    return false;
  }

 private:
  std::vector<signed char> pattern_;
  int stable_ = 0;
  int next_ = 8;
};

struct Polished {
  Eigen::VectorXd z;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

double KktViolation(const KktReport& kkt) {
  return std::max(kkt.sign_residual,
                  std::max(0.0, kkt.off_support_max - 1.0));
}

std::optional<Polished> TryPolishEquality(const Eigen::MatrixXd& m,
                                          const Eigen::VectorXd& b,
                                          const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& feasible_ref,
                                          const Eigen::VectorXd& hint,
                                          const SolverConfig& config) {
  const std::vector<int> support = DetectSupport(z, config.refine_mag_tol);
  if (support.empty() || support.size() > static_cast<size_t>(m.rows())) {
    return std::nullopt;
  }
  const Eigen::MatrixXd ms = m(Eigen::all, support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ms);
  if (qr.rank() < static_cast<Eigen::Index>(support.size())) {
    return std::nullopt;
  }
  const Eigen::VectorXd zs = qr.solve(b);
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(z.size());
  candidate(support) = zs;

  const double b_scale = std::max(1.0, b.norm());
  const double primal = (m * candidate - b).norm() / b_scale;
  if (primal > config.primal_tol || primal > (m * z - b).norm() / b_scale) {
    return std::nullopt;
  }
  const double ref_obj = feasible_ref.lpNorm<1>();
  if (candidate.lpNorm<1>() >
      ref_obj + config.primal_tol * std::max(1.0, ref_obj)) {
    return std::nullopt;
  }
  const KktReport kkt = KktCheck(m, b, candidate, config.kkt_tol, &hint);
  if (!kkt.passed) return std::nullopt;
  return Polished{candidate, primal, KktViolation(kkt)};
}

// Closed-form minimizer on a fixed support and sign pattern with the ball
// constraint active: z_S = G^-1 (M_S^T b - t s), ||M_S z_S - b|| = radius.
std::optional<Polished> TryPolishBall(const Eigen::MatrixXd& m,
                                      const Eigen::VectorXd& b, double radius,
                                      const Eigen::VectorXd& z,
                                      const SolverConfig& config) {
  const std::vector<int> support = DetectSupport(z, config.refine_mag_tol);
  if (support.empty() || support.size() > static_cast<size_t>(m.rows())) {
    return std::nullopt;
  }
  const Eigen::MatrixXd ms = m(Eigen::all, support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ms);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (qr.rank() < k) return std::nullopt;

  const Eigen::VectorXd signs = SignsOn(z, support);
  const Eigen::VectorXd ls = qr.solve(b);
  const Eigen::VectorXd e0 = ms * ls - b;
  // g = (M_S^T M_S)^-1 s through the triangular factor.
  const auto r = qr.matrixR().topLeftCorner(k, k);
  const Eigen::VectorXd ps = qr.colsPermutation().transpose() * signs;
  const Eigen::VectorXd t1 =
      r.transpose().triangularView<Eigen::Lower>().solve(ps);
  const Eigen::VectorXd t2 = r.triangularView<Eigen::Upper>().solve(t1);
  const Eigen::VectorXd g = qr.colsPermutation() * t2;
  const Eigen::VectorXd e1 = ms * g;

  const double slack = radius * radius - e0.squaredNorm();
  if (slack < 0.0 || e1.squaredNorm() == 0.0) return std::nullopt;
  const double t = std::sqrt(slack / e1.squaredNorm());
  const Eigen::VectorXd zs = ls - t * g;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (zs(i) * signs(i) <= 0.0) return std::nullopt;
  }
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(z.size());
  candidate(support) = zs;

  const double excess =
      std::max(0.0, (m * candidate - b).norm() - radius) /
      std::max(1.0, b.norm());
  if (excess > config.primal_tol) return std::nullopt;
  const double z_resid = (m * z - b).norm();
  if (z_resid <= radius) {
    const double ref_obj = z.lpNorm<1>();
    if (candidate.lpNorm<1>() >
        ref_obj + config.primal_tol * std::max(1.0, ref_obj)) {
      return std::nullopt;
    }
  }
  const KktReport kkt = KktCheckBall(m, b, radius, candidate, config.kkt_tol);
  if (!kkt.passed) return std::nullopt;
  return Polished{candidate, excess, KktViolation(kkt)};
}

void Finish(const Polished& polished, BpSolution* sol) {
  sol->z = polished.z;
  sol->status = SolveStatus::kConverged;
  sol->primal_residual = polished.primal_residual;
  sol->dual_residual = polished.dual_residual;
  sol->refined = true;
}


class DenseOperator {
 public:
  explicit DenseOperator(const Eigen::MatrixXd& m) : m_(m) {
    Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(m.rows(), m.rows());
    inner.selfadjointView<Eigen::Lower>().rankUpdate(m);
    llt_.compute(inner);
  }
  Eigen::VectorXd Apply(const Eigen::VectorXd& z) const { return m_ * z; }
  Eigen::VectorXd ApplyT(const Eigen::VectorXd& y) const {
    return m_.transpose() * y;
  }
  Eigen::VectorXd SolveInner(const Eigen::VectorXd& y) const {
    return llt_.solve(y);
  }

 private:
  const Eigen::MatrixXd& m_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// M = [A, c I]. I + M M^T = k I + A A^T with k = 1 + c^2, inverted through
// the n x n system k I + A^T A.
class StackedOperator {
 public:
  StackedOperator(const Eigen::MatrixXd& a, double c)
      : a_(a), c_(c), k_(1.0 + c * c) {
    Eigen::MatrixXd small = k_ * Eigen::MatrixXd::Identity(a.cols(), a.cols());
    small.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    llt_.compute(small);
  }
  Eigen::VectorXd Apply(const Eigen::VectorXd& z) const {
    Eigen::VectorXd out = c_ * z.tail(a_.rows());
    out.noalias() += a_ * z.head(a_.cols());
    return out;
  }
  Eigen::VectorXd ApplyT(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(a_.cols() + a_.rows());
    out.head(a_.cols()).noalias() = a_.transpose() * y;
    out.tail(a_.rows()) = c_ * y;
    return out;
  }
  Eigen::VectorXd SolveInner(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd t = llt_.solve(a_.transpose() * y);
    Eigen::VectorXd out = y;
    out.noalias() -= a_ * t;
    return out / k_;
  }

 private:
  const Eigen::MatrixXd& a_;
  double c_;
  double k_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Ball-constrained splitting on an operator exposing Apply (Mz), ApplyT
// (M^T y) and SolveInner ((I + M M^T)^-1 y). The dense M is kept for the
// polish and its certificate.
template <typename Op>
BpSolution SolveBallWithOperator(const Op& op, const Eigen::MatrixXd& m,
                                 const Eigen::VectorXd& b, double radius,
                                 const SolverConfig& config) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index n = m.cols();

  BpSolution sol;
  if (b.norm() <= radius) {
    sol.z = Eigen::VectorXd::Zero(n);
    sol.status = SolveStatus::kConverged;
    return sol;
  }

  // z-update solves (I + M^T M) z = rhs; by Woodbury only I + M M^T is
  // inverted.
  auto z_update = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    return rhs - op.ApplyT(op.SolveInner(op.Apply(rhs)));
  };
  auto project_ball = [radius](Eigen::VectorXd* w) {
    const double norm = w->norm();
    if (norm > radius) *w *= radius / norm;
  };

  Eigen::VectorXd z = z_update(op.ApplyT(b));
  Eigen::VectorXd x = z;
  Eigen::VectorXd w = op.Apply(z) - b;
  project_ball(&w);
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u2 = Eigen::VectorXd::Zero(rows);
  double rho = 1.0 / std::max(z.cwiseAbs().maxCoeff(), kTiny);
  const double alpha = config.relax;

  PolishSchedule schedule;
  double r_rel = 0.0;
  double s_rel = 0.0;
  int it = 0;
  for (it = 1; it <= config.max_iters; ++it) {
    const Eigen::VectorXd rhs = x - u1 + op.ApplyT(b + w - u2);
    z = z_update(rhs);
    const Eigen::VectorXd mz = op.Apply(z) - b;

    const Eigen::VectorXd x_hat = alpha * z + (1.0 - alpha) * x;
    const Eigen::VectorXd w_hat = alpha * mz + (1.0 - alpha) * w;
    const Eigen::VectorXd x_old = x;
    const Eigen::VectorXd w_old = w;
    x = x_hat + u1;
    SoftThresholdInPlace(1.0 / rho, &x);
    w = w_hat + u2;
    project_ball(&w);
    u1 += x_hat - x;
    u2 += w_hat - w;

    const double r =
        std::sqrt((z - x).squaredNorm() + (mz - w).squaredNorm());
    const Eigen::VectorXd dx = x - x_old;
    const Eigen::VectorXd mtdw = op.ApplyT(w - w_old);
    const double s = rho * (dx + mtdw).norm();
    r_rel = r / std::max({z.norm(), x.norm(), mz.norm(), kTiny});
    s_rel = s / std::max(
                    {rho * u1.norm(), rho * op.ApplyT(u2).norm(), kTiny});
    if (r_rel <= config.primal_tol && s_rel <= config.dual_tol) {
      sol.status = SolveStatus::kConverged;
      break;
    }

    if (config.refine && schedule.Update(x)) {
      if (auto polished = TryPolishBall(m, b, radius, x, config)) {
        Finish(*polished, &sol);
        sol.iterations = it;
        return sol;
      }
    }

    if (it % kBalanceEvery == 0) {
      if (r_rel > kBalanceRatio * s_rel) {
        rho *= 2.0;
        u1 /= 2.0;
        u2 /= 2.0;
      } else if (s_rel > kBalanceRatio * r_rel) {
        rho /= 2.0;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }
  sol.iterations = std::min(it, config.max_iters);
  sol.z = x;
  sol.primal_residual = r_rel;
  sol.dual_residual = s_rel;
  if (config.refine) {
    if (auto polished = TryPolishBall(m, b, radius, x, config)) {
      Finish(*polished, &sol);
    }
  }
  return sol;
}


}  // namespace

void SolverConfig::Validate() const {
  if (!(primal_tol > 0.0) || !(dual_tol > 0.0) || !(kkt_tol > 0.0) ||
      !(refine_mag_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "solver tolerances must be > 0");
  }
  if (max_iters < 1) {
    throw Error(ErrorCode::kInvalidSpec, "max_iters must be >= 1");
  }
  if (!(relax > 1.0 && relax < 2.0)) {
    throw Error(ErrorCode::kInvalidSpec, "relax must lie in (1, 2)");
  }
}

const char* SolveStatusName(SolveStatus status) {
  return status == SolveStatus::kConverged ? "converged" : "not_converged";
}

Eigen::VectorXd StackedSystem::Stack(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& f) const {
  Eigen::VectorXd z(n + m);
  z.head(n) = x;
  z.tail(m) = lambda * f;
  return z;
}

void StackedSystem::Unpack(const Eigen::VectorXd& z, Eigen::VectorXd* x,
                           Eigen::VectorXd* f) const {
  *x = z.head(n);
  *f = z.tail(m) / lambda;
}

StackedSystem ReduceWeightedToBp(const Eigen::MatrixXd& a, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidSpec, "lambda must be positive");
  }
  StackedSystem sys;
  sys.lambda = lambda;
  sys.n = static_cast<int>(a.cols());
  sys.m = static_cast<int>(a.rows());
  sys.matrix.resize(sys.m, sys.n + sys.m);
  sys.matrix.leftCols(sys.n) = a;
  sys.matrix.rightCols(sys.m) =
      Eigen::MatrixXd::Identity(sys.m, sys.m) / lambda;
  return sys;
}

BpSolution SolveBpEquality(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                           const SolverConfig& config) {
  config.Validate();
  if (b.size() != m.rows()) {
    throw Error(ErrorCode::kShape, "measurement length does not match M");
  }
  AffineProjector projector(m, b);
  const Eigen::Index n = m.cols();

  BpSolution sol;
  if (b.cwiseAbs().maxCoeff() == 0.0) {
    sol.z = Eigen::VectorXd::Zero(n);
    sol.status = SolveStatus::kConverged;
    return sol;
  }

  Eigen::VectorXd z = projector.MinNormPoint();
  Eigen::VectorXd y = z;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y_hat(n), z_old(n), v(n);
  double rho = 1.0 / std::max(z.cwiseAbs().maxCoeff(), kTiny);
  const double alpha = config.relax;

  PolishSchedule schedule;
  double r_rel = 0.0;
  double s_rel = 0.0;
  int it = 0;
  for (it = 1; it <= config.max_iters; ++it) {
    v = z - u;
    projector.Project(v, &y);
    y_hat = alpha * y + (1.0 - alpha) * z;
    z_old = z;
    z = y_hat + u;
    SoftThresholdInPlace(1.0 / rho, &z);
    u += y_hat - z;

    const double r = (y - z).norm();
    const double s = rho * (z - z_old).norm();
    r_rel = r / std::max({y.norm(), z.norm(), kTiny});
    s_rel = s / std::max(rho * u.norm(), kTiny);
    if (r_rel <= config.primal_tol && s_rel <= config.dual_tol) {
      sol.status = SolveStatus::kConverged;
      break;
    }

    if (config.refine && schedule.Update(z)) {
      const Eigen::VectorXd hint = projector.DualFromRange(rho * u);
      if (auto polished = TryPolishEquality(m, b, z, y, hint, config)) {
        Finish(*polished, &sol);
        sol.iterations = it;
        return sol;
      }
    }

    if (it % kBalanceEvery == 0) {
      if (r_rel > kBalanceRatio * s_rel) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s_rel > kBalanceRatio * r_rel) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }
  sol.iterations = std::min(it, config.max_iters);
  sol.z = z;
  sol.primal_residual = r_rel;
  sol.dual_residual = s_rel;
  if (config.refine) {
    const Eigen::VectorXd hint = projector.DualFromRange(rho * u);
    if (auto polished = TryPolishEquality(m, b, z, y, hint, config)) {
      Finish(*polished, &sol);
    }
  }
  return sol;
}

BpSolution SolveBpBall(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                       double radius, const SolverConfig& config) {
  config.Validate();
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "radius must be >= 0");
  }
  if (radius == 0.0) return SolveBpEquality(m, b, config);
  if (b.size() != m.rows()) {
    throw Error(ErrorCode::kShape, "measurement length does not match M");
  }
  return SolveBallWithOperator(DenseOperator(m), m, b, radius, config);
}

namespace {

std::optional<double> ScoreAgainstTruth(const ProblemInstance& instance,
                                        const Eigen::VectorXd& x_hat,
                                        const Eigen::VectorXd& f_hat) {
  if (!instance.has_ground_truth) return std::nullopt;
  const Eigen::VectorXd x_true = instance.signal.Dense();
  const Eigen::VectorXd f_true = instance.corruption.Dense();
  if (x_true.squaredNorm() + f_true.squaredNorm() == 0.0) {
    // Zero truth: exact recovery scores 0, anything else is an infinite miss.
    return x_hat.squaredNorm() + f_hat.squaredNorm() == 0.0
               ? 0.0
               : std::numeric_limits<double>::infinity();
  }
  return RelativeError(x_true, f_true, x_hat, f_hat);
}

// Same checks as SolveBpBall, with the [A, I / lambda] structure exploited.
BpSolution SolveWeightedBall(const StackedSystem& sys,
                             const ProblemInstance& instance, double radius,
                             const SolverConfig& config) {
  const Eigen::VectorXd& b = instance.measurements;
  config.Validate();
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "radius must be >= 0");
  }
  if (radius == 0.0) return SolveBpEquality(sys.matrix, b, config);
  if (b.size() != sys.matrix.rows()) {
    throw Error(ErrorCode::kShape, "measurement length does not match M");
  }
  return SolveBallWithOperator(
      StackedOperator(instance.matrix, 1.0 / sys.lambda), sys.matrix, b,
      radius, config);
}

SolveResult FromSolution(const BpSolution& sol) {
  SolveResult result;
  result.status = sol.status;
  result.iterations = sol.iterations;
  result.primal_residual = sol.primal_residual;
  result.dual_residual = sol.dual_residual;
  result.refined = sol.refined;
  return result;
}

}  // namespace

SolveResult SolveWeightedCorruption(const ProblemInstance& instance,
                                    double lambda, double radius,
                                    const SolverConfig& config) {
  const StackedSystem sys = ReduceWeightedToBp(instance.matrix, lambda);
  const BpSolution sol = SolveWeightedBall(sys, instance, radius, config);
  SolveResult result = FromSolution(sol);
  sys.Unpack(sol.z, &result.x_hat, &result.f_hat);
  result.relative_error =
      ScoreAgainstTruth(instance, result.x_hat, result.f_hat);
  return result;
}

SolveResult SolveScaledCorruption(const ProblemInstance& instance,
                                  double theta_a, double theta_i,
                                  const SolverConfig& config) {
  if (!(theta_a > 0.0) || !(theta_i > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "theta_a and theta_i must be > 0");
  }
  const Eigen::Index m = instance.matrix.rows();
  const Eigen::Index n = instance.matrix.cols();
  Eigen::MatrixXd scaled(m, n + m);
  scaled.leftCols(n) = theta_a * instance.matrix;
  scaled.rightCols(m) = theta_i * Eigen::MatrixXd::Identity(m, m);
  const BpSolution sol =
      SolveBpEquality(scaled, instance.measurements, config);
  SolveResult result = FromSolution(sol);
  result.x_hat = theta_a * sol.z.head(n);
  result.f_hat = theta_i * sol.z.tail(m);
  result.relative_error =
      ScoreAgainstTruth(instance, result.x_hat, result.f_hat);
  return result;
}

double RelativeError(const Eigen::VectorXd& truth_x,
                     const Eigen::VectorXd& truth_f,
                     const Eigen::VectorXd& x_hat,
                     const Eigen::VectorXd& f_hat) {
  if (truth_x.size() != x_hat.size() || truth_f.size() != f_hat.size()) {
    throw Error(ErrorCode::kShape, "estimate and truth differ in length");
  }
  const double denom =
      std::sqrt(truth_x.squaredNorm() + truth_f.squaredNorm());
  if (denom == 0.0) {
    throw Error(ErrorCode::kUndefinedRelativeError,
                "relative error of an all-zero ground truth");
  }
  const double num = std::sqrt((truth_x - x_hat).squaredNorm() +
                               (truth_f - f_hat).squaredNorm());
  return 100.0 * num / denom;
}

KktReport KktCheck(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& z, double tol,
                   const Eigen::VectorXd* witness_hint) {
  if (b.size() != m.rows() || z.size() != m.cols()) {
    throw Error(ErrorCode::kShape, "KKT check dimensions disagree");
  }
  KktReport report;
  report.primal_residual =
      m.rows() > 0 ? (m * z - b).cwiseAbs().maxCoeff() : 0.0;
  const double b_scale =
      std::max(1.0, b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  report.feasible = report.primal_residual <= tol * b_scale;

  const double z_scale =
      std::max(1.0, z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > tol * z_scale) {
      report.support.push_back(static_cast<int>(i));
    }
  }
  const std::vector<int> off =
      Complement(report.support, static_cast<int>(z.size()));
  const Eigen::MatrixXd ms = m(Eigen::all, report.support);
  const Eigen::MatrixXd moff = m(Eigen::all, off);
  const Eigen::VectorXd signs = SignsOn(z, report.support);
  const auto k = static_cast<Eigen::Index>(report.support.size());

  std::optional<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> cod;
  if (k > 0) {
    cod.emplace(ms.transpose());
    report.full_column_rank = cod->rank() == k;
  } else {
    report.full_column_rank = true;
  }

  struct Fit {
    Eigen::VectorXd h;
    double sign_residual;
    double off_max;
  };
  auto fit_from = [&](const Eigen::VectorXd& h0) {
    Fit fit;
    fit.h = h0;
    if (k > 0) {
      const Eigen::VectorXd r = signs - ms.transpose() * h0;
      fit.h += cod->solve(r);
      fit.sign_residual =
          (ms.transpose() * fit.h - signs).cwiseAbs().maxCoeff();
    } else {
      fit.sign_residual = 0.0;
    }
    fit.off_max =
        off.empty() ? 0.0 : (moff.transpose() * fit.h).cwiseAbs().maxCoeff();
    return fit;
  };
  auto violation = [](const Fit& f) {
    return std::max(f.sign_residual, f.off_max - 1.0);
  };

  Fit best = fit_from(Eigen::VectorXd::Zero(m.rows()));
  if (witness_hint != nullptr && witness_hint->size() == m.rows()) {
    Fit hinted = fit_from(*witness_hint);
    if (violation(hinted) < violation(best)) best = std::move(hinted);
  }
  report.witness = best.h;
  report.sign_residual = best.sign_residual;
  report.off_support_max = best.off_max;
  report.passed = report.feasible && best.sign_residual <= tol &&
                  best.off_max <= 1.0 + tol;
  report.unique =
      report.passed && best.off_max < 1.0 - tol && report.full_column_rank;
  return report;
}

KktReport KktCheckBall(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                       double radius, const Eigen::VectorXd& z, double tol) {
  if (b.size() != m.rows() || z.size() != m.cols()) {
    throw Error(ErrorCode::kShape, "KKT check dimensions disagree");
  }
  KktReport report;
  const Eigen::VectorXd resid = m * z - b;
  const double resid_norm = resid.norm();
  report.primal_residual = std::max(0.0, resid_norm - radius);
  const double scale = std::max(1.0, radius);
  report.feasible = resid_norm <= radius + tol * scale;

  const double z_scale =
      std::max(1.0, z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > tol * z_scale) {
      report.support.push_back(static_cast<int>(i));
    }
  }
  const auto k = static_cast<Eigen::Index>(report.support.size());

  if (b.norm() <= radius) {
    // Origin is feasible and the unique minimizer.
    report.full_column_rank = true;
    report.witness = Eigen::VectorXd::Zero(m.rows());
    report.passed = report.feasible && k == 0;
    report.unique = report.passed;
    return report;
  }
  if (k == 0) return report;

  const std::vector<int> off =
      Complement(report.support, static_cast<int>(z.size()));
  const Eigen::MatrixXd ms = m(Eigen::all, report.support);
  const Eigen::VectorXd signs = SignsOn(z, report.support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ms);
  report.full_column_rank = qr.rank() == k;

  const Eigen::VectorXd g = -(m.transpose() * resid);
  const Eigen::VectorXd gs = g(report.support);
  const double mu = gs.squaredNorm() > 0.0 ? gs.dot(signs) / gs.squaredNorm()
                                           : 0.0;
  report.witness = -mu * resid;
  report.sign_residual = (mu * gs - signs).cwiseAbs().maxCoeff();
  report.off_support_max =
      off.empty() ? 0.0 : mu * g(off).cwiseAbs().maxCoeff();
  const bool active = std::abs(resid_norm - radius) <= tol * scale;
  report.passed = report.feasible && active && mu > 0.0 &&
                  report.sign_residual <= tol &&
                  report.off_support_max <= 1.0 + tol;
  report.unique = report.passed && report.off_support_max < 1.0 - tol &&
                  report.full_column_rank;
  return report;
}

}  // namespace cscorr
