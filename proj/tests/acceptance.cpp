// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances are fixed here and never adapted to the results.

#include "oracles.hpp"
#include "temp_dir.hpp"

#include <pdsplit/cli.hpp>
#include <pdsplit/io.hpp>
#include <pdsplit/tomo.hpp>

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdsplit;
using oracle::Gen;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

template <class F>
void criterion(int id, std::string const &name, F &&body)
{
  Outcome out;
  try {
    out = body();
  } catch (std::exception const &e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) { ++failures; }
  fmt::print("{} {}: {} ({})\n", out.pass ? "PASS" : "FAIL", id, name, out.detail);
  std::fflush(stdout);
}

Vec steps_of(StepParam const &s, std::size_t n)
{
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) { out[i] = s[i]; }
  return out;
}

std::vector<std::pair<std::string, ProxFunction>> random_family(Gen &g, std::size_t n)
{
  Vec lo = g.vec(n, -2.0, 0.0);
  Vec hi = lo;
  for (auto &h : hi) { h += g.uniform(0.0, 2.0); }
  if (g.coin(0.3)) { lo[0] = -oracle::kInf; }
  return {{"zero", fn::Zero{}},
          {"l1", fn::L1{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)}},
          {"sql2", fn::SqL2{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)}},
          {"l2norm", fn::L2Norm{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)}},
          {"group", fn::GroupL12{g.uniform(0.0, 3.0), n / 2}},
          {"nonneg", fn::IndicatorNonneg{}},
          {"box", fn::IndicatorBox{lo, hi}}};
}

StepParam random_step(Gen &g, ProxFunction const &f, std::size_t n, bool diagonal)
{
  if (!diagonal || std::holds_alternative<fn::L2Norm>(f)) { return g.uniform(0.05, 5.0); }
  Vec d = g.vec(n, 0.05, 5.0);
  if (std::holds_alternative<fn::GroupL12>(f)) {
    for (std::size_t i = 0; i < n / 2; ++i) { d[n / 2 + i] = d[i]; }
  }
  return DiagonalMetric(d);
}

Outcome prox_suite()
{
  auto const t0 = Clock::now();
  Gen g(1001);
  double worst_prox = 0.0, worst_moreau = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t const n = 2 * (1 + g.index(5));
    for (auto const &[name, f] : random_family(g, n)) {
      StepParam const step = random_step(g, f, n, trial % 2 == 1);
      Vec const lam = steps_of(step, n);
      Vec const v = g.normals(n, 3.0);
      worst_prox = std::max(worst_prox, oracle::max_abs_diff(prox(f, step, v), oracle::prox(f, lam, v)));

      double const s = g.uniform(0.05, 5.0);
      Vec const p = prox(f, s, v);
      Vec vs = v;
      for (auto &e : vs) { e /= s; }
      Vec const c = prox_conjugate(f, 1.0 / s, vs);
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) { r = std::max(r, std::abs(v[i] - p[i] - s * c[i])); }
      worst_moreau = std::max(worst_moreau, r);
      ++cases;
    }
  }
  double const secs = seconds_since(t0);
  bool const ok = worst_prox <= 1e-9 && worst_moreau <= 1e-10 && secs < 10.0;
  return {ok, fmt::format("{} cases over 7 variants, max oracle error {:.2e} <= 1e-9, max Moreau residual {:.2e} "
                          "<= 1e-10, {:.2f} s < 10 s",
                          cases, worst_prox, worst_moreau, secs)};
}

Outcome operator_suite()
{
  Gen g(1002);
  double worst_adj = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<OperatorPtr> ops;
    std::size_t const cols = 1 + g.index(20);
    ops.push_back(std::make_shared<const SparseMatrix>(oracle::random_sparse(g, 1 + g.index(20), cols, 0.3)));
    ops.push_back(std::make_shared<const IdentityOperator>(cols));
    ops.push_back(std::make_shared<const DiagonalOperator>(g.normals(cols)));
    OperatorPtr const st = stack(ops);
    auto const grad = grad_2d(1 + g.index(10));
    ScaledOperator const sc(g.vec(st->rows(), 0.1, 2.0), st, g.vec(cols, 0.1, 2.0));
    for (LinearOperator const *op : {ops[0].get(), ops[1].get(), ops[2].get(), st.get(),
                                     static_cast<LinearOperator const *>(grad.get()),
                                     static_cast<LinearOperator const *>(&sc)}) {
      Vec const x = g.normals(op->cols());
      Vec const y = g.normals(op->rows());
      double const lhs = oracle::dot(apply(*op, x), y);
      double const rhs = oracle::dot(x, apply_adjoint(*op, y));
      worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  }
  double worst_grad = 0.0;
  for (std::size_t n = 1; n <= 8; ++n) {
    auto const a = oracle::materialize(*grad_2d(n));
    auto const b = oracle::kron_gradient(n);
    worst_grad = std::max(worst_grad, oracle::max_abs_diff(a.a, b.a));
  }
  double const eye = power_iteration(IdentityOperator(5));
  double const diag = power_iteration(DiagonalOperator({1.0, 2.0, 3.0}));
  // 1-D forward differences on three samples, last row zero.
  auto const b3 = SparseMatrix::from_dense({3, 3}, std::vector<double>{-1, 1, 0, 0, -1, 1, 0, 0, 0});
  double const diff = power_iteration(b3);
  bool const ok = worst_adj <= 1e-10 && worst_grad <= 1e-14 && std::abs(eye - 1.0) <= 1e-6 &&
                  std::abs(diag - 3.0) <= 1e-6 && std::abs(diff - std::sqrt(3.0)) <= 1e-6;
  return {ok, fmt::format("adjoint {:.1e} <= 1e-10, gradient vs Kronecker {:.1e} <= 1e-14, power iteration "
                          "{:.9f}/{:.9f}/{:.9f} vs 1/3/sqrt(3) within 1e-6",
                          worst_adj, worst_grad, eye, diag, diff)};
}

Outcome preconditioner_bound()
{
  auto const t0 = Clock::now();
  Gen g(1003);
  double worst = 0.0;
  int runs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t const cols = 2 + g.index(30);
    std::vector<OperatorPtr> ops;
    std::size_t const count = 1 + g.index(4);
    for (std::size_t b = 0; b < count; ++b) {
      ops.push_back(std::make_shared<const SparseMatrix>(
        oracle::random_sparse(g, 1 + g.index(30), cols, g.uniform(0.1, 0.6))));
    }
    OperatorPtr const st = stack(ops);
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      auto const p = build_preconditioners(ops, alpha);
      Vec left, right;
      for (auto const &s : p.sigmas) {
        for (double e : s.entries()) { left.push_back(std::sqrt(e)); }
      }
      for (double e : p.tau.entries()) { right.push_back(std::sqrt(e)); }
      ScaledOperator const m(left, st, right);
      worst = std::max(worst, power_iteration(m, 5000, 1e-14));
      ++runs;
    }
  }
  double const secs = seconds_since(t0);
  return {worst <= 1.0 + 1e-8 && secs < 30.0,
          fmt::format("{} stacks x alpha, max norm {:.12f} <= 1 + 1e-8, {:.2f} s < 30 s", runs, worst, secs)};
}

Outcome analytic_solves()
{
  Gen g(1004);
  std::size_t const n = 25;
  Vec const b = g.normals(n, 2.0);
  Vec clamped = b;
  for (auto &e : clamped) { e = std::max(e, 0.0); }
  auto const eye = std::make_shared<const IdentityOperator>(n);
  StopRule const stop{1e-12, 5000};
  FixedSteps const steps{0.9, 0.9, 1.0};

  Problem ls;
  ls.terms.push_back({fn::SqL2{1.0, b}, eye});
  auto const r1 = solve(ls, steps, stop);
  Problem nn = ls;
  nn.g = fn::IndicatorNonneg{};
  auto const r2 = solve(nn, steps, stop);

  double const e1 = oracle::max_abs_diff(r1.x, b);
  double const e2 = oracle::max_abs_diff(r2.x, clamped);
  bool const ok = e1 <= 1e-6 && e2 <= 1e-6 && r1.iterations < 5000 && r2.iterations < 5000;
  return {ok, fmt::format("least squares error {:.1e} in {} iterations, nonneg error {:.1e} in {} iterations "
                          "(tau = sigma = 0.9, need <= 1e-6 and < 5000)",
                          e1, r1.iterations, e2, r2.iterations)};
}

Outcome method_equivalence()
{
  auto const t = tomo::paralleltomo(32, tomo::angle_range(0, 10, 179));
  Vec const b = tomo::add_noise(t.b, tomo::default_noise(t.b, 0));
  double worst = 0.0;
  std::size_t compared = 0;
  for (auto tv : {tomo::TvKind::Anisotropic, tomo::TvKind::Isotropic}) {
    tomo::CtModelSpec spec{0.5, 0.5, 0.8, tv, {tomo::Constraint::Kind::None}, tomo::Method::ConstraintAsTerm};
    auto const one = tomo::build_ct_problem(t.a, b, 32, spec);
    spec.method = tomo::Method::ConstraintAsPrimal;
    auto const two = tomo::build_ct_problem(t.a, b, 32, spec);
    auto const [tau, sigma] = default_fixed_steps(one);
    std::vector<Vec> xs1, xs2;
    SolveOptions o1, o2;
    o1.observer = [&](std::size_t, std::span<const double> x, std::vector<Vec> const &) { xs1.emplace_back(x.begin(), x.end()); };
    o2.observer = [&](std::size_t, std::span<const double> x, std::vector<Vec> const &) { xs2.emplace_back(x.begin(), x.end()); };
    StopRule const stop{1e-300, 200};
    solve(one, FixedSteps{tau, sigma, 1.0}, stop, {}, {}, o1);
    solve(two, FixedSteps{tau, sigma, 1.0}, stop, {}, {}, o2);
    if (xs1.size() != 200 || xs2.size() != 200) { return {false, "runs stopped before 200 iterations"}; }
    for (std::size_t k = 0; k < 200; ++k) { worst = std::max(worst, oracle::max_abs_diff(xs1[k], xs2[k])); }
    compared += 200;
  }
  return {worst <= 1e-14, fmt::format("{} iterates compared (ATV and ITV, n=32), max difference {:.1e} <= 1e-14",
                                      compared, worst)};
}

Outcome geometry()
{
  auto const g = tomo::Geometry{256, tomo::angle_range(0, 10, 179), tomo::default_ray_count(256), {}};
  auto const a = tomo::projection_matrix(g);

  Gen gen(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t const n = 1 + gen.index(32);
    double const h = 0.5 * double(n);
    double const phi = gen.uniform(0.0, 2.0 * std::numbers::pi);
    std::array<double, 2> const o{gen.uniform(-h, h), gen.uniform(-h, h)};
    std::array<double, 2> const d{std::cos(phi), std::sin(phi)};
    double sum = 0.0;
    for (auto const &s : tomo::trace_ray(n, o, d)) { sum += s.length; }
    worst = std::max(worst, std::abs(sum - oracle::line_box_chord(o, d, -h, h, -h, h)));
  }
  bool const ok = a.rows() == 6516 && a.cols() == 65536 && worst <= 1e-9;
  return {ok, fmt::format("A is {} (need 6516 x 65536), 1000 random chord sums within {:.1e} <= 1e-9",
                          to_string(a.shape()), worst)};
}

Outcome trend()
{
  auto const t0 = Clock::now();
  TempDir dir;
  // The shipped default run: n=64, 0:10:179, ATV, lambda=0.8, box [0,1],
  // default noise with seed 0.
  cli::RunConfig cfg;
  cli::cmd_simulate(cfg, dir / "bundle");

  auto run = [&](cli::PolicyKind policy, double eps) {
    cli::RunConfig c = cfg;
    c.solver.policy = policy;
    c.solver.epsilon = eps;
    auto const s = cli::cmd_solve(c, dir / "bundle", dir / "out");
    if (!s.converged) { throw std::runtime_error(fmt::format("no convergence at epsilon {} within {}", eps, c.solver.max_iter)); }
    return s;
  };
  auto const fixed3 = run(cli::PolicyKind::AutoFixed, 1e-3);
  auto const pre3 = run(cli::PolicyKind::Preconditioned, 1e-3);
  auto const pre4 = run(cli::PolicyKind::Preconditioned, 1e-4);
  auto const pre5 = run(cli::PolicyKind::Preconditioned, 1e-5);
  double const secs = seconds_since(t0);

  Vec const truth = io::read_vector_csv(dir / "bundle/x_true.csv");
  double const zero_snr = tomo::snr_db(truth, Vec(truth.size(), 0.0));
  double const factor = double(fixed3.iterations) / double(pre3.iterations);
  bool const a = factor >= 2.0;
  bool const b = pre5.final_snr_db >= pre3.final_snr_db;
  bool const c = pre4.final_snr_db - zero_snr >= 10.0;
  return {a && b && c && secs < 300.0,
          fmt::format("(a) {} fixed vs {} preconditioned iterations at 1e-3, factor {:.2f} >= 2 {}; "
                      "(b) SNR {:.3f} dB at 1e-5 vs {:.3f} dB at 1e-3 {}; "
                      "(c) SNR {:.3f} dB at 1e-4 vs {:.3f} dB for the zero image {}; {:.1f} s < 300 s",
                      fixed3.iterations, pre3.iterations, factor, a ? "ok" : "FAILED", pre5.final_snr_db,
                      pre3.final_snr_db, b ? "ok" : "FAILED", pre4.final_snr_db, zero_snr, c ? "ok" : "FAILED",
                      secs)};
}

std::string slurp(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism()
{
  TempDir dir;
  cli::RunConfig const cfg;
  for (auto run : {"first", "second"}) {
    std::string const root = dir / run;
    cli::cmd_simulate(cfg, root + "/bundle");
    cli::cmd_solve(cfg, root + "/bundle", root + "/result");
  }
  std::size_t files = 0;
  for (auto const &entry : fs::recursive_directory_iterator(dir.path / "first")) {
    if (!entry.is_regular_file()) { continue; }
    auto const other = dir.path / "second" / fs::relative(entry.path(), dir.path / "first");
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      return {false, "differs: " + fs::relative(entry.path(), dir.path).string()};
    }
    ++files;
  }
  std::size_t second_files = 0;
  for (auto const &entry : fs::recursive_directory_iterator(dir.path / "second")) {
    second_files += entry.is_regular_file() ? 1 : 0;
  }
  bool const ok = files > 0 && files == second_files;
  return {ok, fmt::format("{} files byte-identical across two simulate + solve runs of the default config", files)};
}

} // namespace

int main()
{
  criterion(1, "prox operators match the minimization oracle and Moreau's identity", prox_suite);
  criterion(2, "operator adjoints, gradient assembly and power iteration", operator_suite);
  criterion(3, "diagonal preconditioning keeps the scaled operator norm at most one", preconditioner_bound);
  criterion(4, "analytic least squares and nonnegative least squares solves", analytic_solves);
  criterion(5, "constraint as term and as primal are iterate-identical when unconstrained", method_equivalence);
  criterion(6, "projection geometry shape and chord lengths", geometry);
  criterion(7, "preconditioning speedup and SNR trend on the default 64x64 run", trend);
  criterion(8, "repeated runs produce byte-identical bundles", determinism);
  fmt::print("{} of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
