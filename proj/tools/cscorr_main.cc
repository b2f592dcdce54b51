// Command-line front end: gen, solve, certify, rip, theory, experiment,
// diagnose. Results go to stdout (or --out); the resolved configuration is
// echoed to stderr as JSON.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cscorr/bp_solver.h"
#include "cscorr/error.h"
#include "cscorr/experiment.h"
#include "cscorr/golfing.h"
#include "cscorr/json_io.h"
#include "cscorr/problem_gen.h"
#include "cscorr/random.h"
#include "cscorr/rip.h"
#include "cscorr/theory_bounds.h"

namespace {

using cscorr::Json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
  bool pretty = false;
};

void EmitConfig(const Json& config) {
  std::cerr << cscorr::DumpJson(config, -1) << "\n";
}

void EmitResult(const Json& result, const std::string& out) {
  const std::string text = cscorr::DumpJson(result) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    cscorr::WriteTextFile(out, text);
  }
}

std::string WithSuffix(const std::string& path, const std::string& suffix) {
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int DefaultSx(int n) {
  const double base = 0.2 * n;
  return static_cast<int>(std::floor(base / std::log(base))) + 1;
}

// ---------------------------------------------------------------------------
// Solver flags shared by several subcommands.

struct SolverFlags {
  cscorr::SolverConfig config;
  bool no_refine = false;

  void Attach(CLI::App* app) {
    app->add_option("--primal-tol", config.primal_tol,
                    "Relative primal stopping tolerance");
    app->add_option("--dual-tol", config.dual_tol,
                    "Relative dual stopping tolerance");
    app->add_option("--max-iters", config.max_iters, "Iteration cap");
    app->add_option("--relax", config.relax, "Over-relaxation in (1, 2)");
    app->add_flag("--no-refine", no_refine,
                  "Disable the least-squares support polish");
    app->add_option("--refine-mag-tol", config.refine_mag_tol,
                    "Support threshold relative to max |z_i|");
    app->add_option("--kkt-tol", config.kkt_tol,
                    "Tolerance of the KKT check on polished points");
  }

  cscorr::SolverConfig Resolve() const {
    cscorr::SolverConfig c = config;
    c.refine = !no_refine;
    c.Validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string ensemble = "gaussian_iid";
  int m = 0;
  int n = 0;
  int sx = 0;
  int sf = 0;
  double signal_std = 1.0;
  double corruption_std = 10.0;
  double noise_radius = 0.0;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::string out;
};

void AddGen(CLI::App& app, GenOptions& o) {
  CLI::App* sub = app.add_subcommand("gen", "Generate a problem instance");
  sub->add_option("--ensemble", o.ensemble,
                  "gaussian_iid | rademacher_iid | gaussian_times_orthobasis");
  sub->add_option("--m", o.m, "Rows")->required();
  sub->add_option("--n", o.n, "Columns")->required();
  sub->add_option("--sx", o.sx, "Signal sparsity")->required();
  sub->add_option("--sf", o.sf, "Corruption sparsity")->required();
  sub->add_option("--signal-std", o.signal_std, "Std of signal nonzeros");
  sub->add_option("--corruption-std", o.corruption_std,
                  "Std of corruption nonzeros");
  sub->add_option("--noise-radius", o.noise_radius,
                  "Norm of the dense noise vector");
  sub->add_flag("--normalize", o.normalize, "Scale the matrix by 1/sqrt(m)");
  sub->add_option("--seed", o.seed, "Master seed")->required();
  sub->add_option("--out", o.out, "Output path (default stdout)");
}

int RunGen(const GenOptions& o) {
  const cscorr::EnsembleKind kind = cscorr::ParseEnsembleKind(o.ensemble);
  Json cfg = {{"command", "gen"},
              {"ensemble", cscorr::EnsembleKindName(kind)},
              {"m", o.m},
              {"n", o.n},
              {"sx", o.sx},
              {"sf", o.sf},
              {"signal_std", o.signal_std},
              {"corruption_std", o.corruption_std},
              {"noise_radius", o.noise_radius},
              {"normalize", o.normalize},
              {"seed", o.seed},
              {"out", o.out}};
  EmitConfig(cfg);
  Eigen::MatrixXd a = cscorr::GenerateSensingMatrix(
      {kind, o.m, o.n, cscorr::DeriveSeed(o.seed, {1})});
  if (o.normalize) a /= std::sqrt(static_cast<double>(o.m));
  const auto x = cscorr::GenerateSparseGroundTruth(
      o.n, o.sx, o.signal_std, cscorr::DeriveSeed(o.seed, {2}));
  const auto f = cscorr::GenerateSparseGroundTruth(
      o.m, o.sf, o.corruption_std, cscorr::DeriveSeed(o.seed, {3}));
  const Eigen::VectorXd v = cscorr::GenerateDenseNoise(
      o.m, o.noise_radius, cscorr::DeriveSeed(o.seed, {4}));
  EmitResult(cscorr::ToJson(cscorr::AssembleMeasurements(a, x, f, v)), o.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
  std::string in;
  std::string mode = "thm21";
  std::optional<double> lambda;
  std::string lambda_rule = "experiment";
  std::optional<int> sx;
  std::optional<double> radius;
  std::optional<double> theta_a;
  std::optional<double> theta_i;
  std::optional<int> sf_estimate;
  double c_i = 2.0;
  double eps = 0.01;
  bool kkt = false;
  SolverFlags solver;
  std::string out;
};

void AddSolve(CLI::App& app, SolveOptions& o) {
  CLI::App* sub = app.add_subcommand("solve", "Recover (x, f) from an instance");
  sub->add_option("--in", o.in, "Instance JSON")->required();
  sub->add_option("--mode", o.mode,
                  "thm21 (weighted program) | thm22 (scaled program)");
  sub->add_option("--lambda", o.lambda,
                  "Corruption weight (thm21); default from --lambda-rule");
  sub->add_option("--lambda-rule", o.lambda_rule,
                  "experiment: 1/sqrt(ln(n/sx)) | theorem: 1/sqrt(ln(en/sx))");
  sub->add_option("--sx", o.sx,
                  "Signal sparsity estimate (default: ground truth, else "
                  "floor(0.2n/ln(0.2n))+1)");
  sub->add_option("--radius", o.radius,
                  "Noise radius (thm21; default: instance noise_radius)");
  sub->add_option("--theta-a", o.theta_a,
                  "thm22 column scale of A (default 1/sqrt(sf estimate))");
  sub->add_option("--theta-i", o.theta_i,
                  "thm22 scale of I (default c_I sqrt(ln(2n/eps)))");
  sub->add_option("--sf-estimate", o.sf_estimate,
                  "thm22 corruption size estimate (default floor(0.1 m))");
  sub->add_option("--c-i", o.c_i, "thm22 constant c_I");
  sub->add_option("--eps", o.eps, "thm22 probability parameter");
  sub->add_flag("--kkt", o.kkt, "Attach a KKT report for the stacked program");
  o.solver.Attach(sub);
  sub->add_option("--out", o.out, "Output path (default stdout)");
}

int RunSolve(const SolveOptions& o, const GlobalOptions& g) {
  const cscorr::ProblemInstance inst =
      cscorr::InstanceFromJson(cscorr::ReadJsonFile(o.in));
  const cscorr::SolverConfig solver = o.solver.Resolve();
  const cscorr::ExperimentMode mode = cscorr::ParseExperimentMode(o.mode);
  const int n = inst.cols();
  const int m = inst.rows();
  Json cfg = {{"command", "solve"}, {"in", o.in}, {"mode", o.mode}};
  Json result;
  cscorr::SolveResult r;
  Eigen::MatrixXd stacked;
  Eigen::VectorXd z;
  double radius = 0.0;
  if (mode == cscorr::ExperimentMode::kThm21) {
    const int sx = o.sx.value_or(inst.has_ground_truth
                                     ? std::max<int>(1, inst.signal.support.size())
                                     : DefaultSx(n));
    double lambda = 0.0;
    if (o.lambda) {
      lambda = *o.lambda;
    } else if (o.lambda_rule == "experiment") {
      lambda = cscorr::LambdaExperiment(n, sx);
    } else if (o.lambda_rule == "theorem") {
      lambda = cscorr::LambdaTheorem21(n, sx);
    } else {
      throw cscorr::Error(cscorr::ErrorCode::kInvalidSpec,
                          "unknown lambda rule '" + o.lambda_rule + "'");
    }
    radius = o.radius.value_or(inst.noise_radius);
    cfg["sx"] = sx;
    cfg["lambda"] = lambda;
    cfg["radius"] = radius;
    cfg["solver"] = cscorr::ToJson(solver);
    EmitConfig(cfg);
    r = cscorr::SolveWeightedCorruption(inst, lambda, radius, solver);
    const cscorr::StackedSystem sys =
        cscorr::ReduceWeightedToBp(inst.matrix, lambda);
    stacked = sys.matrix;
    z = sys.Stack(r.x_hat, r.f_hat);
    result["lambda"] = lambda;
  } else {
    const int sf_est = o.sf_estimate.value_or(m / 10);
    if (!o.theta_a && sf_est < 1) {
      throw cscorr::Error(cscorr::ErrorCode::kInvalidSpec,
                          "sf estimate is 0: theta_a undefined");
    }
    const double theta_a =
        o.theta_a.value_or(1.0 / std::sqrt(static_cast<double>(sf_est)));
    const double theta_i =
        o.theta_i.value_or(o.c_i * std::sqrt(std::log(2.0 * n / o.eps)));
    cfg["sf_estimate"] = sf_est;
    cfg["theta_a"] = theta_a;
    cfg["theta_i"] = theta_i;
    cfg["solver"] = cscorr::ToJson(solver);
    EmitConfig(cfg);
    r = cscorr::SolveScaledCorruption(inst, theta_a, theta_i, solver);
    stacked.resize(m, n + m);
    stacked.leftCols(n) = theta_a * inst.matrix;
    stacked.rightCols(m) = theta_i * Eigen::MatrixXd::Identity(m, m);
    z.resize(n + m);
    z.head(n) = r.x_hat / theta_a;
    z.tail(m) = r.f_hat / theta_i;
    result["theta_a"] = theta_a;
    result["theta_i"] = theta_i;
  }
  Json body = cscorr::ToJson(r);
  for (auto it = body.begin(); it != body.end(); ++it) result[it.key()] = it.value();
  if (o.kkt) {
    const cscorr::KktReport k =
        radius > 0.0
            ? cscorr::KktCheckBall(stacked, inst.measurements, radius, z, 1e-6)
            : cscorr::KktCheck(stacked, inst.measurements, z, 1e-6);
    result["kkt"] = cscorr::ToJson(k);
  }
  if (g.pretty) {
    std::printf("status      %s\niterations  %d\nrefined     %s\n",
                cscorr::SolveStatusName(r.status), r.iterations,
                r.refined ? "yes" : "no");
    if (r.relative_error) std::printf("RE (%%)      %.3e\n", *r.relative_error);
    if (!o.out.empty()) cscorr::WriteTextFile(o.out, cscorr::DumpJson(result) + "\n");
  } else {
    EmitResult(result, o.out);
  }
  return r.converged() ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyOptions {
  std::string in;
  std::string ensemble = "gaussian_iid";
  int n = 128;
  int m = 115;
  int sx = 8;
  int sf = 11;
  std::optional<std::uint64_t> seed;
  double c_i = 2.0;
  double eps = 0.01;
  double c_1 = 1.0;
  double c = 0.5;
  double c_tilde = 0.05;
  std::optional<double> theta_a;
  std::optional<double> theta_i;
  double tol = 1e-8;
  bool solve = false;
  int events = 0;
  std::string dump_state;
  std::string out;
  SolverFlags solver;
};

void AddCertify(CLI::App& app, CertifyOptions& o) {
  CLI::App* sub = app.add_subcommand(
      "certify", "Build the golfing dual vector and verify the certificate");
  sub->add_option("--in", o.in,
                  "Instance JSON with ground truth (else one is generated)");
  sub->add_option("--ensemble", o.ensemble, "Ensemble for generated instances");
  sub->add_option("--n", o.n, "Columns (generated instances)");
  sub->add_option("--m", o.m, "Rows (generated instances)");
  sub->add_option("--sx", o.sx, "Signal sparsity (generated instances)");
  sub->add_option("--sf", o.sf, "Corruption sparsity (generated instances)");
  sub->add_option("--seed", o.seed,
                  "Seed; required unless --in is given without --events");
  sub->add_option("--c-i", o.c_i, "Constant c_I");
  sub->add_option("--eps", o.eps, "Probability parameter epsilon");
  sub->add_option("--c1", o.c_1, "Constant c_1 (recorded only)");
  sub->add_option("--c", o.c, "Subgaussian parameter (event bounds)");
  sub->add_option("--ctilde", o.c_tilde, "Concentration constant (event bounds)");
  sub->add_option("--theta-a", o.theta_a, "Override theta_a (default 1/sqrt(|s_f|))");
  sub->add_option("--theta-i", o.theta_i,
                  "Override theta_i (default c_I sqrt(ln(2n/eps)))");
  sub->add_option("--tol", o.tol, "Tolerance for the s_x equality and rank");
  sub->add_flag("--solve", o.solve, "Also solve the scaled program and report RE");
  sub->add_option("--events", o.events,
                  "Run N trials of certificate event frequencies instead");
  sub->add_option("--dump-state", o.dump_state,
                  "Write all golfing vectors to this JSON path");
  o.solver.Attach(sub);
  sub->add_option("--out", o.out, "Output path (default stdout)");
}

int RunCertify(const CertifyOptions& o, const GlobalOptions& g) {
  const cscorr::EnsembleKind kind = cscorr::ParseEnsembleKind(o.ensemble);
  Json cfg = {{"command", "certify"}, {"tol", o.tol}, {"c_i", o.c_i}, {"eps", o.eps}};

  if (o.events > 0) {
    if (!o.seed) {
      throw CLI::RequiredError("--seed is required with --events");
    }
    cscorr::TheoryConfig theory;
    theory.m = o.m;
    theory.n = o.n;
    theory.sx_size = o.sx;
    theory.sf_size = o.sf;
    theory.epsilon_prob = o.eps;
    theory.c = o.c;
    theory.c_tilde = o.c_tilde;
    theory.c_i = o.c_i;
    theory.c_1 = o.c_1;
    cscorr::GolfingParams params =
        cscorr::ParamsTheorem22(o.n, o.sf, o.eps, o.c_i, o.c_1);
    if (o.theta_a) params.theta_a = *o.theta_a;
    if (o.theta_i) params.theta_i = *o.theta_i;
    cfg["theory"] = cscorr::ToJson(theory);
    cfg["params"] = cscorr::ToJson(params);
    cfg["ensemble"] = cscorr::EnsembleKindName(kind);
    cfg["trials"] = o.events;
    cfg["seed"] = *o.seed;
    EmitConfig(cfg);
    const auto table = cscorr::CertificateEventFrequencies(kind, theory, params,
                                                           o.events, *o.seed);
    if (g.pretty) {
      std::printf("%-14s %8s %12s\n", "event", "freq", "bound");
      for (const auto& e : table.events) {
        std::printf("%-14s %8.4f %12.6f\n", e.name.c_str(), e.frequency, e.bound);
      }
      std::printf("degenerate trials: %d of %d\n", table.degenerate, table.trials);
    } else {
      EmitResult(cscorr::ToJson(table), o.out);
    }
    return kExitOk;
  }

  cscorr::ProblemInstance inst;
  if (!o.in.empty()) {
    inst = cscorr::InstanceFromJson(cscorr::ReadJsonFile(o.in));
    if (!inst.has_ground_truth) {
      throw cscorr::Error(cscorr::ErrorCode::kInvalidSpec,
                          "certify needs an instance with ground truth");
    }
    cfg["in"] = o.in;
  } else {
    if (!o.seed) throw CLI::RequiredError("--seed");
    const Eigen::MatrixXd a = cscorr::GenerateSensingMatrix(
        {kind, o.m, o.n, cscorr::DeriveSeed(*o.seed, {1})});
    inst = cscorr::AssembleMeasurements(
        a,
        cscorr::GenerateSparseGroundTruth(o.n, o.sx, 1.0,
                                          cscorr::DeriveSeed(*o.seed, {2})),
        cscorr::GenerateSparseGroundTruth(o.m, o.sf, 10.0,
                                          cscorr::DeriveSeed(*o.seed, {3})),
        Eigen::VectorXd::Zero(o.m));
    cfg["generated"] = {{"ensemble", cscorr::EnsembleKindName(kind)},
                        {"n", o.n}, {"m", o.m}, {"sx", o.sx}, {"sf", o.sf},
                        {"seed", *o.seed}};
  }
  const int n = inst.cols();
  cscorr::GolfingParams params = cscorr::ParamsTheorem22(
      n, static_cast<int>(inst.corruption.support.size()), o.eps, o.c_i, o.c_1);
  if (o.theta_a) params.theta_a = *o.theta_a;
  if (o.theta_i) params.theta_i = *o.theta_i;
  cfg["params"] = cscorr::ToJson(params);
  EmitConfig(cfg);

  const auto& sx = inst.signal.support;
  const auto& sf = inst.corruption.support;
  const Eigen::VectorXd sigx = inst.signal.Signs();
  const Eigen::VectorXd sigf = inst.corruption.Signs();
  const cscorr::GolfingState st =
      cscorr::RunGolfing(inst.matrix, params, sx, sigx, sf, sigf);
  const cscorr::CertReport rep = cscorr::VerifyCertificate(
      st, inst.matrix, params, sx, sigx, sf, sigf, o.tol);
  if (!o.dump_state.empty()) {
    cscorr::WriteTextFile(o.dump_state, cscorr::DumpJson(cscorr::ToJson(st)) + "\n");
  }
  Json result;
  result["params"] = cscorr::ToJson(params);
  result["report"] = cscorr::ToJson(rep);
  if (o.solve) {
    const auto r = cscorr::SolveScaledCorruption(inst, params.theta_a,
                                                 params.theta_i, o.solver.Resolve());
    result["solve"] = {{"status", cscorr::SolveStatusName(r.status)},
                       {"relative_error", *r.relative_error}};
  }
  if (g.pretty) {
    std::printf("certificate       %s\n", rep.passed ? "PASS" : "FAIL");
    std::printf("theta_I h(s_f)    %s\n", rep.cond_hsf ? "exact" : "MISMATCH");
    std::printf("|u(s_x)-sigma_x|  %.3e\n", rep.usx_max_deviation);
    std::printf("max |u(s_x^c)|    %.6f\n", rep.max_u_off);
    std::printf("max th_I|h(s_f^c)| %.6f\n", rep.max_h_off);
    std::printf("B full rank       %s\n", rep.b_full_rank ? "yes" : "no");
  } else {
    EmitResult(result, o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rip

struct RipOptions {
  std::string in;
  std::string ensemble = "gaussian_iid";
  int m = 6;
  int n = 8;
  std::optional<std::uint64_t> seed;
  int s1 = 1;
  int s2 = 1;
  std::string mode = "exact";
  int trials = 1000;
  std::uint64_t cap = cscorr::kDefaultRipCap;
  std::optional<double> bound_radius;
  bool singular_values = false;
  std::string out;
};

void AddRip(CLI::App& app, RipOptions& o) {
  CLI::App* sub = app.add_subcommand(
      "rip", "Generalized RIP constant of [A/sqrt(m), I]");
  sub->add_option("--in", o.in,
                  "Instance JSON; its matrix is scaled by 1/sqrt(m)");
  sub->add_option("--ensemble", o.ensemble, "Ensemble for generated matrices");
  sub->add_option("--m", o.m, "Rows (generated)");
  sub->add_option("--n", o.n, "Columns (generated)");
  sub->add_option("--seed", o.seed,
                  "Seed; required for generated matrices and sampled mode");
  sub->add_option("--s1", o.s1, "Signal support size");
  sub->add_option("--s2", o.s2, "Corruption support size");
  sub->add_option("--mode", o.mode, "exact | sampled");
  sub->add_option("--trials", o.trials, "Sampled support pairs");
  sub->add_option("--cap", o.cap, "Maximum support pairs in exact mode");
  sub->add_option("--bound-radius", o.bound_radius,
                  "Also evaluate the stability bound at this noise radius");
  sub->add_flag("--singular-values", o.singular_values,
                "Also report the extreme singular values of A/sqrt(m)");
  sub->add_option("--out", o.out, "Output path (default stdout)");
}

int RunRip(const RipOptions& o, const GlobalOptions& g) {
  Json cfg = {{"command", "rip"}, {"s1", o.s1}, {"s2", o.s2}, {"mode", o.mode}};
  Eigen::MatrixXd a;
  if (!o.in.empty()) {
    a = cscorr::InstanceFromJson(cscorr::ReadJsonFile(o.in)).matrix;
    cfg["in"] = o.in;
  } else {
    if (!o.seed) throw CLI::RequiredError("--seed");
    const auto kind = cscorr::ParseEnsembleKind(o.ensemble);
    a = cscorr::GenerateSensingMatrix({kind, o.m, o.n, *o.seed});
    cfg["generated"] = {{"ensemble", cscorr::EnsembleKindName(kind)},
                        {"m", o.m}, {"n", o.n}, {"seed", *o.seed}};
  }
  a /= std::sqrt(static_cast<double>(a.rows()));
  cscorr::RipEstimate est;
  if (o.mode == "exact") {
    cfg["cap"] = o.cap;
    EmitConfig(cfg);
    est = cscorr::GeneralizedRipExact(a, o.s1, o.s2, o.cap, 1);
  } else if (o.mode == "sampled") {
    if (!o.seed) throw CLI::RequiredError("--seed");
    cfg["trials"] = o.trials;
    cfg["seed"] = *o.seed;
    EmitConfig(cfg);
    est = cscorr::GeneralizedRipSampled(a, o.s1, o.s2, o.trials,
                                        cscorr::DeriveSeed(*o.seed, {0x5a}));
  } else {
    throw cscorr::Error(cscorr::ErrorCode::kInvalidSpec,
                        "unknown rip mode '" + o.mode + "'");
  }
  Json result = cscorr::ToJson(est);
  if (o.bound_radius) {
    try {
      result["stability_bound"] = cscorr::LemmaB1Bound(est.delta, *o.bound_radius);
    } catch (const cscorr::Error& e) {
      if (e.code() != cscorr::ErrorCode::kBoundInapplicable) throw;
      result["stability_bound"] = nullptr;
      result["stability_bound_note"] = e.what();
    }
  }
  if (o.singular_values) {
    const auto [lo, hi] = cscorr::SingularValueRange(a);
    result["sigma_min"] = lo;
    result["sigma_max"] = hi;
  }
  if (g.pretty) {
    std::printf("delta_{%d,%d} = %.12f (%s, %llu pairs)\n", est.s1, est.s2,
                est.delta, cscorr::RipModeName(est.mode),
                static_cast<unsigned long long>(est.pairs_evaluated));
  } else {
    EmitResult(result, o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryOptions {
  cscorr::TheoryConfig config;
  bool c1_min = false;
  std::string out;
};

void AddTheoryFlags(CLI::App* sub, TheoryOptions& o) {
  sub->add_option("--n", o.config.n, "Signal dimension")->required();
  sub->add_option("--m", o.config.m, "Measurements")->required();
  sub->add_option("--sx", o.config.sx_size, "|s_x|")->required();
  sub->add_option("--sf", o.config.sf_size, "|s_f|")->required();
  sub->add_option("--eps", o.config.epsilon_prob, "Probability parameter");
  sub->add_option("--c", o.config.c, "Subgaussian parameter");
  sub->add_option("--ctilde", o.config.c_tilde, "Concentration constant");
  sub->add_option("--c-i", o.config.c_i, "Constant c_I");
  sub->add_option("--c1", o.config.c_1, "Constant c_1");
  sub->add_flag("--c1-min", o.c1_min, "Set c_1 to its smallest admissible value");
  sub->add_option("--alpha", o.config.alpha, "Sparsity fraction alpha");
  sub->add_option("--out", o.out, "Output path (default stdout)");
}

int RunTheory(const std::string& which, TheoryOptions o, const GlobalOptions& g) {
  if (o.c1_min) {
    o.config.c_1 = cscorr::EvaluateThm22Conditions(o.config).c_1_min;
  }
  o.config.Validate();
  EmitConfig({{"command", "theory " + which}, {"config", cscorr::ToJson(o.config)}});
  Json result;
  if (which == "budgets") {
    const auto b = cscorr::ComputeThm21Budgets(o.config);
    result = cscorr::ToJson(b);
    result["lambda_experiment"] =
        o.config.sx_size < o.config.n
            ? Json(cscorr::LambdaExperiment(o.config.n, o.config.sx_size))
            : Json(nullptr);
    if (g.pretty) {
      std::printf("sx_max %d\nsf_max %d\nlambda %.6f\n", b.sx_max, b.sf_max,
                  b.lambda);
      return kExitOk;
    }
  } else if (which == "conditions") {
    const auto c = cscorr::EvaluateThm22Conditions(o.config);
    result = cscorr::ToJson(c);
    if (g.pretty) {
      std::printf("%-36s %14s\n", "measurement term", "value");
      for (const auto& t : c.measurement_terms) {
        std::printf("%-36s %14.4f%s\n", t.name.c_str(), t.value,
                    t.name == c.measurement_binding ? "  <- binding" : "");
      }
      std::printf("m - sf = %.0f  met: %s  m_required: %d  deficit: %d\n",
                  c.measurement_lhs, c.measurement_condition_met ? "yes" : "no",
                  c.m_required, c.m_deficit);
      std::printf("%-36s %14s\n", "c_1 term", "value");
      for (const auto& t : c.c_1_terms) {
        std::printf("%-36s %14.4f%s\n", t.name.c_str(), t.value,
                    t.name == c.c_1_binding ? "  <- binding" : "");
      }
      std::printf("%-36s %14s\n", "c_I term", "value");
      for (const auto& t : c.c_i_terms) {
        std::printf("%-36s %14.4f\n", t.name.c_str(), t.value);
      }
      std::printf("c_I ok: %s (c~ reading %s, c reading %s)  c_1 ok: %s\n",
                  c.c_i_ok ? "yes" : "no", c.c_i_ok_ctilde_reading ? "yes" : "no",
                  c.c_i_ok_c_reading ? "yes" : "no", c.c_1_ok ? "yes" : "no");
      return kExitOk;
    }
  } else {
    const auto p = cscorr::EvaluateThm22Probabilities(o.config);
    result = cscorr::ToJson(p);
    if (g.pretty) {
      for (int i = 0; i < 4; ++i) std::printf("P_du(%d) %+.12f\n", i + 1, p.p_du[i]);
      for (int i = 0; i < 3; ++i) std::printf("P_dh(%d) %+.12f\n", i + 2, p.p_dh[i]);
      std::printf("total   %+.12f\n", p.total_lower_bound);
      return kExitOk;
    }
  }
  EmitResult(result, o.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOptions {
  std::string grid;
  std::vector<int> n_values;
  std::vector<double> theta_m;
  std::vector<double> theta_f;
  std::optional<int> trials;
  std::optional<std::string> mode;
  std::optional<std::string> ensemble;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool desk = false;
  bool raw_matrix = false;
  int workers = 1;
  std::string out;
  std::string json;
  std::string pgm;
  SolverFlags solver;
};

void AddExperiment(CLI::App& app, ExperimentOptions& o) {
  CLI::App* sub = app.add_subcommand("experiment", "Phase-transition grid");
  sub->add_option("--grid", o.grid, "Grid spec JSON (flags override it)");
  sub->add_option("--n", o.n_values, "Signal dimensions [128,256,512]");
  sub->add_option("--theta-m", o.theta_m, "m/n ratios [0.1,...,1.0]");
  sub->add_option("--theta-f", o.theta_f, "|s_f|/m ratios [0.1,...,0.5]");
  sub->add_option("--trials", o.trials, "Trials per cell [100]");
  sub->add_option("--mode", o.mode, "thm21 | thm22 [thm21]");
  sub->add_option("--ensemble", o.ensemble, "Sensing ensemble [gaussian_iid]");
  sub->add_option("--seed", o.seed,
                  "Master seed; required unless the grid file sets master_seed");
  sub->add_option("--threshold", o.threshold, "Success threshold on RE in % [1e-8]");
  sub->add_flag("--desk", o.desk, "Desk scale: n in {64,128}, 25 trials");
  sub->add_flag("--raw-matrix", o.raw_matrix,
                "thm21: use the raw ensemble instead of A/sqrt(m)");
  sub->add_option("--workers", o.workers, "Worker threads");
  sub->add_option("--out", o.out, "CSV path");
  sub->add_option("--json", o.json, "JSON path");
  sub->add_option("--pgm", o.pgm, "PGM path");
  o.solver.Attach(sub);
}

int RunExperiment(const ExperimentOptions& o, const GlobalOptions& g,
                  CLI::App* sub) {
  cscorr::GridSpec spec;
  bool seeded = false;
  if (o.desk) {
    spec.n_values = {64, 128};
    spec.trials = 25;
  }
  if (!o.grid.empty()) {
    const Json j = cscorr::ReadJsonFile(o.grid);
    seeded = j.contains("master_seed");
    spec = cscorr::GridSpecFromJson(j, spec);
  }
  if (!o.n_values.empty()) spec.n_values = o.n_values;
  if (!o.theta_m.empty()) spec.theta_m_values = o.theta_m;
  if (!o.theta_f.empty()) spec.theta_f_values = o.theta_f;
  if (o.trials) spec.trials = *o.trials;
  if (o.mode) spec.mode = cscorr::ParseExperimentMode(*o.mode);
  if (o.ensemble) spec.ensemble = cscorr::ParseEnsembleKind(*o.ensemble);
  if (o.threshold) spec.success_threshold = *o.threshold;
  if (o.raw_matrix) spec.normalize_weighted = false;
  if (o.seed) {
    spec.master_seed = *o.seed;
    seeded = true;
  }
  if (!seeded) throw CLI::RequiredError("--seed");
  const bool solver_flags_given =
      sub->count("--primal-tol") + sub->count("--dual-tol") +
          sub->count("--max-iters") + sub->count("--relax") +
          sub->count("--no-refine") + sub->count("--refine-mag-tol") +
          sub->count("--kkt-tol") >
      0;
  if (solver_flags_given || o.grid.empty()) spec.solver = o.solver.Resolve();
  spec.Validate();
  EmitConfig({{"command", "experiment"},
              {"grid", cscorr::ToJson(spec)},
              {"workers", o.workers},
              {"out", o.out},
              {"json", o.json},
              {"pgm", o.pgm}});

  const std::vector<cscorr::HeatMap> maps = cscorr::RunPhaseGrid(spec, o.workers);
  Json summary = Json::array();
  for (const auto& h : maps) {
    const std::string suffix =
        maps.size() > 1 ? "_n" + std::to_string(h.n) : std::string();
    if (!o.out.empty()) cscorr::EmitCsv(h, WithSuffix(o.out, suffix));
    if (!o.json.empty()) cscorr::EmitJson(h, WithSuffix(o.json, suffix));
    if (!o.pgm.empty()) cscorr::EmitPgm(h, WithSuffix(o.pgm, suffix));
    Json s;
    s["n"] = h.n;
    s["mode"] = cscorr::ExperimentModeName(h.mode);
    s["sx_size"] = h.sx_size;
    s["trials"] = h.trials;
    s["monotone_theta_m"] = cscorr::MonotoneTrendFraction(h, true);
    s["monotone_theta_f"] = cscorr::MonotoneTrendFraction(h, false);
    s["nonconverged_total"] = h.nonconverged.sum();
    s["theta_m"] = h.theta_m;
    s["theta_f"] = h.theta_f;
    s["cells"] = cscorr::ToJson(h.cells);
    summary.push_back(std::move(s));
    if (g.pretty) {
      std::printf("n = %d (%s), %d trials/cell\n%s\n", h.n,
                  cscorr::ExperimentModeName(h.mode), h.trials,
                  cscorr::HeatMapCsv(h).c_str());
    }
  }
  if (!g.pretty) std::cout << cscorr::DumpJson(summary) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseOptions {
  std::string ensemble = "gaussian_iid";
  std::string dist = "gaussian";
  int draws = 10000;
  double c = 0.5;
  std::vector<double> t_grid = {0.0, 1.0, 2.0, 3.0};
  std::vector<double> weight = {1.0};
  int m = 500;
  int n = 8;
  int trials = 1000;
  double t = 0.3;
  double c_tilde = 0.05;
  int directions = 20;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunDiagnose(const std::string& which, const DiagnoseOptions& o,
                const GlobalOptions& g) {
  if (!o.seed) throw CLI::RequiredError("--seed");
  Json result;
  if (which == "tail") {
    EmitConfig({{"command", "diagnose tail"}, {"dist", o.dist}, {"draws", o.draws},
                {"c", o.c}, {"t", o.t_grid}, {"weight", o.weight},
                {"seed", *o.seed}});
    cscorr::Rng rng = cscorr::MakeRng(*o.seed);
    std::vector<double> samples(static_cast<size_t>(o.draws) * o.weight.size());
    if (o.dist == "gaussian") {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& s : samples) s = normal(rng);
    } else if (o.dist == "rademacher") {
      for (double& s : samples) s = (rng() >> 63) ? 1.0 : -1.0;
    } else {
      throw cscorr::Error(cscorr::ErrorCode::kInvalidSpec,
                          "unknown distribution '" + o.dist + "'");
    }
    const auto rep = cscorr::SubgaussianTailDiagnostic(samples, o.weight, o.c, o.t_grid);
    result["draws"] = rep.num_draws;
    result["c"] = rep.c;
    result["weight_norm_sq"] = rep.weight_norm_sq;
    result["any_flagged"] = rep.any_flagged;
    Json pts = Json::array();
    for (const auto& p : rep.points) {
      pts.push_back({{"t", p.t}, {"frequency", p.frequency}, {"bound", p.bound},
                     {"std_error", p.std_error}, {"flagged", p.flagged}});
      if (g.pretty) {
        std::printf("t=%-6g freq=%.5f bound=%.5f se=%.5f %s\n", p.t, p.frequency,
                    p.bound, p.std_error, p.flagged ? "FLAG" : "");
      }
    }
    result["points"] = std::move(pts);
  } else if (which == "concentration") {
    const auto kind = cscorr::ParseEnsembleKind(o.ensemble);
    EmitConfig({{"command", "diagnose concentration"},
                {"ensemble", cscorr::EnsembleKindName(kind)}, {"m", o.m},
                {"n", o.n}, {"trials", o.trials}, {"t", o.t},
                {"c_tilde", o.c_tilde}, {"seed", *o.seed}});
    const auto rep = cscorr::ConcentrationDiagnostic({kind, o.m, o.n, *o.seed},
                                                     o.trials, o.t, o.c_tilde);
    result = {{"trials", rep.trials}, {"rows", rep.rows}, {"t", rep.t},
              {"c_tilde", rep.c_tilde}, {"frequency", rep.frequency},
              {"std_error", rep.std_error}, {"bound", rep.bound}};
    if (g.pretty) {
      std::printf("freq=%.5f se=%.5f bound=%.5f\n", rep.frequency, rep.std_error,
                  rep.bound);
    }
  } else {
    const auto kind = cscorr::ParseEnsembleKind(o.ensemble);
    EmitConfig({{"command", "diagnose isotropy"},
                {"ensemble", cscorr::EnsembleKindName(kind)}, {"m", o.m},
                {"n", o.n}, {"directions", o.directions}, {"seed", *o.seed}});
    const auto rep =
        cscorr::IsotropyDiagnostic({kind, o.m, o.n, *o.seed}, o.directions);
    result["rows"] = rep.rows;
    result["violations"] = rep.violations;
    Json dirs = Json::array();
    for (const auto& d : rep.directions) {
      dirs.push_back({{"mean", d.mean}, {"std_error", d.std_error},
                      {"within_band", d.within_band}});
    }
    result["directions"] = std::move(dirs);
    if (g.pretty) {
      std::printf("violations %d of %zu directions\n", rep.violations,
                  rep.directions.size());
    }
  }
  if (!g.pretty) EmitResult(result, o.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery from grossly corrupted measurements"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_flag("--pretty", global.pretty, "Human-readable tables")
      ->trigger_on_parse();

  GenOptions gen;
  SolveOptions solve;
  CertifyOptions certify;
  RipOptions rip;
  ExperimentOptions experiment;
  DiagnoseOptions diagnose;
  AddGen(app, gen);
  AddSolve(app, solve);
  AddCertify(app, certify);
  AddRip(app, rip);
  AddExperiment(app, experiment);

  CLI::App* theory = app.add_subcommand("theory", "Closed-form bound evaluator");
  theory->require_subcommand(1);
  TheoryOptions th_budgets, th_conditions, th_probs;
  AddTheoryFlags(theory->add_subcommand("budgets", "Sparsity budgets and lambda"),
                 th_budgets);
  AddTheoryFlags(
      theory->add_subcommand("conditions", "Measurement and constant conditions"),
      th_conditions);
  AddTheoryFlags(theory->add_subcommand("probs", "Success-probability terms"),
                 th_probs);

  CLI::App* diag = app.add_subcommand("diagnose", "Ensemble diagnostics");
  diag->require_subcommand(1);
  CLI::App* tail = diag->add_subcommand("tail", "Subgaussian tail bound check");
  tail->add_option("--dist", diagnose.dist, "gaussian | rademacher");
  tail->add_option("--draws", diagnose.draws, "Number of weighted sums");
  tail->add_option("--c", diagnose.c, "Subgaussian parameter");
  tail->add_option("--t", diagnose.t_grid, "Thresholds");
  tail->add_option("--weight", diagnose.weight, "Weight vector a");
  tail->add_option("--seed", diagnose.seed, "Seed")->required();
  tail->add_option("--out", diagnose.out, "Output path");
  CLI::App* conc =
      diag->add_subcommand("concentration", "Norm concentration of A x / sqrt(m)");
  conc->add_option("--ensemble", diagnose.ensemble, "Ensemble");
  conc->add_option("--m", diagnose.m, "Rows");
  conc->add_option("--n", diagnose.n, "Columns");
  conc->add_option("--trials", diagnose.trials, "Fresh matrices (>= 100)");
  conc->add_option("--t", diagnose.t, "Deviation in (0, 1)");
  conc->add_option("--ctilde", diagnose.c_tilde, "Constant in the bound");
  conc->add_option("--seed", diagnose.seed, "Seed")->required();
  conc->add_option("--out", diagnose.out, "Output path");
  CLI::App* iso = diag->add_subcommand("isotropy", "Row isotropy check");
  iso->add_option("--ensemble", diagnose.ensemble, "Ensemble");
  iso->add_option("--m", diagnose.m, "Rows");
  iso->add_option("--n", diagnose.n, "Columns");
  iso->add_option("--directions", diagnose.directions, "Random unit directions");
  iso->add_option("--seed", diagnose.seed, "Seed")->required();
  iso->add_option("--out", diagnose.out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("gen")) return RunGen(gen);
    if (app.got_subcommand("solve")) return RunSolve(solve, global);
    if (app.got_subcommand("certify")) return RunCertify(certify, global);
    if (app.got_subcommand("rip")) return RunRip(rip, global);
    if (app.got_subcommand("experiment")) {
      return RunExperiment(experiment, global, app.get_subcommand("experiment"));
    }
    if (theory->parsed()) {
      if (theory->got_subcommand("budgets")) {
        return RunTheory("budgets", th_budgets, global);
      }
      if (theory->got_subcommand("conditions")) {
        return RunTheory("conditions", th_conditions, global);
      }
      return RunTheory("probs", th_probs, global);
    }
    if (diag->parsed()) {
      if (diag->got_subcommand("tail")) return RunDiagnose("tail", diagnose, global);
      if (diag->got_subcommand("concentration")) {
        return RunDiagnose("concentration", diagnose, global);
      }
      return RunDiagnose("isotropy", diagnose, global);
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cscorr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
