#include "oracles.hpp"

#include <doctest.h>

using namespace pdsplit;
using oracle::Gen;

namespace {

Vec steps_of(StepParam const &s, std::size_t n)
{
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) { out[i] = s[i]; }
  return out;
}

// f(z) + Σ (z_i − v_i)²/(2 λ_i)
double prox_objective(ProxFunction const &f, Vec const &lam, Vec const &v, Vec const &z)
{
  double s = evaluate(f, z);
  for (std::size_t i = 0; i < v.size(); ++i) { s += (z[i] - v[i]) * (z[i] - v[i]) / (2.0 * lam[i]); }
  return s;
}

// A random instance of each family member, sized n (even).
std::vector<ProxFunction> random_family(Gen &g, std::size_t n)
{
  Vec lo = g.vec(n, -2.0, 0.0);
  Vec hi = lo;
  for (auto &h : hi) { h += g.uniform(0.0, 2.0); }
  lo[0] = -oracle::kInf;
  return {fn::Zero{},
          fn::L1{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)},
          fn::L1{g.uniform(0.0, 3.0), {}},
          fn::SqL2{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)},
          fn::L2Norm{g.uniform(0.0, 3.0), g.vec(n, -2.0, 2.0)},
          fn::GroupL12{g.uniform(0.0, 3.0), n / 2},
          fn::IndicatorNonneg{},
          fn::IndicatorBox{lo, hi},
          box(0.0, 1.0)};
}

// Per-coordinate steps that respect the pairing required by the group prox
// and the uniform step required by the joint norm.
StepParam random_step(Gen &g, ProxFunction const &f, std::size_t n, bool diagonal)
{
  if (!diagonal || std::holds_alternative<fn::L2Norm>(f)) { return g.uniform(0.05, 5.0); }
  Vec d = g.vec(n, 0.05, 5.0);
  if (std::holds_alternative<fn::GroupL12>(f)) {
    for (std::size_t i = 0; i < n / 2; ++i) { d[n / 2 + i] = d[i]; }
  }
  return DiagonalMetric(d);
}

} // namespace

TEST_CASE("soft threshold by hand")
{
  CHECK(soft_threshold(std::vector<double>{3, -0.5, 1}, 1.0) == Vec{2, 0, 0});
  CHECK(soft_threshold(Vec(4, 0.0), 2.5) == Vec(4, 0.0));
  CHECK(soft_threshold(std::vector<double>{2, -2}, DiagonalMetric({1, 3})) == Vec{1, 0});
}

TEST_CASE("l2 norm prox by hand")
{
  Vec const r = prox_l2norm(std::vector<double>{3, 4}, 2.0, {});
  CHECK(r[0] == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(prox_l2norm(std::vector<double>{3, 4}, 10.0, {}) == Vec{0, 0});
  Vec const b = {1.5, -2.0, 0.25};
  CHECK(prox_l2norm(b, 0.7, b) == b);
}

TEST_CASE("shifted l1 and squared l2 by hand")
{
  CHECK(prox_shifted_l1(std::vector<double>{5}, 2.0, std::vector<double>{1}) == Vec{3});
  // first coordinate: |y − 1| + y²/2 is minimized at y = 1 (0 ∈ [−1, 1] + 1)
  CHECK(prox_shifted_l1(std::vector<double>{0, 4}, 1.0, std::vector<double>{1, 1}) == Vec{1, 3});
  Vec const b = {0.3, -7.0};
  CHECK(prox_shifted_l1(b, 4.0, b) == b);

  CHECK(prox_shifted_sql2(std::vector<double>{4}, 1.0, std::vector<double>{2}) == Vec{3});
  CHECK(prox_shifted_sql2(std::vector<double>{6}, 2.0, std::vector<double>{0}) == Vec{2});
  Vec const r = prox_shifted_sql2(b, 3.0, b);
  CHECK(oracle::max_abs_diff(r, b) <= 1e-15);
}

TEST_CASE("group soft threshold by hand")
{
  Vec const a = group_soft_threshold(std::vector<double>{3, 4}, 2.0);
  CHECK(a[0] == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(group_soft_threshold(Vec(6, 0.0), 1.0) == Vec(6, 0.0));
  Vec const c = group_soft_threshold(std::vector<double>{3, 0, 4, 0}, 1.0);
  CHECK(oracle::max_abs_diff(c, Vec{2.4, 0, 3.2, 0}) <= 1e-15);
  CHECK_THROWS_AS(group_soft_threshold(std::vector<double>{1, 2, 3}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(group_soft_threshold(std::vector<double>{1, 2}, DiagonalMetric({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("projections by hand")
{
  Vec const u = {-1, 0.5, 2};
  CHECK(project(u, fn::IndicatorNonneg{}) == Vec{0, 0.5, 2});
  CHECK(project(u, box(0.0, 1.0)) == Vec{0, 0.5, 1});
  Vec const inside = {0.1, 0.9, 0.0};
  CHECK(project(inside, box(0.0, 1.0)) == inside);
  CHECK_THROWS_AS(validate(box(1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(fn::IndicatorBox{{0.0, 2.0}, {1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("projection is idempotent")
{
  Gen g(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vec const u = g.normals(9, 3.0);
    Vec const lo = g.vec(9, -2.0, 0.0);
    Vec hi = lo;
    for (auto &h : hi) { h += g.uniform(0.0, 1.0); }
    fn::IndicatorBox const b{lo, hi};
    Vec const once = project(u, b);
    CHECK(project(once, b) == once);
    Vec const nn = project(u, fn::IndicatorNonneg{});
    CHECK(project(nn, fn::IndicatorNonneg{}) == nn);
  }
}

TEST_CASE("prox dispatch")
{
  Gen g(9);
  Vec const v = g.normals(6);
  CHECK(prox(fn::Zero{}, 0.3, v) == v);
  Vec const b = g.normals(6);
  // weight folds into the threshold
  CHECK(prox(fn::L1{2.0, b}, 0.25, v) == prox_shifted_l1(v, 0.5, b));
  CHECK(prox(fn::SqL2{3.0, b}, 0.5, v) == prox_shifted_sql2(v, 1.5, b));
  CHECK(prox(fn::IndicatorNonneg{}, 7.0, v) == project(v, fn::IndicatorNonneg{}));
  CHECK_THROWS_AS(prox(fn::L1{-1.0, {}}, 1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(prox(fn::L1{1.0, Vec(5, 0.0)}, 1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(prox(fn::GroupL12{1.0, 2}, 1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(prox(fn::L2Norm{1.0, {}}, DiagonalMetric(g.vec(6, 0.5, 1.0)), v), std::invalid_argument);
  CHECK_THROWS_AS(prox(fn::Zero{}, DiagonalMetric({1.0, 1.0}), v), std::invalid_argument);
  CHECK_THROWS_AS(prox(fn::Zero{}, 0.0, v), std::invalid_argument);
}

TEST_CASE("prox matches the independent minimizer for every family member")
{
  Gen g(101);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t const n = 2 * (1 + g.index(5));
    bool const diagonal = trial % 2 == 1;
    for (auto const &f : random_family(g, n)) {
      StepParam const step = random_step(g, f, n, diagonal);
      Vec const lam = steps_of(step, n);
      Vec const v = g.normals(n, 3.0);
      Vec const got = prox(f, step, v);
      Vec const want = oracle::prox(f, lam, v);
      CHECK(oracle::max_abs_diff(got, want) <= 1e-9);
    }
  }
}

TEST_CASE("prox output beats random and perturbed candidates")
{
  Gen g(103);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t const n = 4;
    for (auto const &f : random_family(g, n)) {
      StepParam const step = random_step(g, f, n, trial % 2 == 0);
      Vec const lam = steps_of(step, n);
      Vec const v = g.normals(n, 2.0);
      Vec const p = prox(f, step, v);
      double const best = prox_objective(f, lam, v, p);
      REQUIRE(std::isfinite(best));
      for (int c = 0; c < 250; ++c) {
        Vec z = c % 2 == 0 ? g.normals(n, 3.0) : p;
        if (c % 2 == 1) {
          for (auto &e : z) { e += g.normal() * 1e-3; }
        }
        double const other = prox_objective(f, lam, v, z);
        CHECK(best <= other + 1e-9 * (1.0 + std::abs(other)));
      }
    }
  }
}

TEST_CASE("Moreau identity against closed-form conjugates")
{
  Gen g(107);
  for (double lam : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t const n = 2 * (1 + g.index(4));
      for (auto const &f : random_family(g, n)) {
        Vec const x = g.normals(n, 4.0);
        Vec const p = prox(f, lam, x);
        Vec xs = x;
        for (auto &e : xs) { e /= lam; }
        Vec const c = prox_conjugate(f, 1.0 / lam, xs);
        Vec residual(n);
        for (std::size_t i = 0; i < n; ++i) { residual[i] = x[i] - p[i] - lam * c[i]; }
        CHECK(oracle::norm(residual) <= 1e-10 * (1.0 + oracle::norm(x)));

        // and the conjugate prox itself against its closed form
        Vec const sig = steps_of(StepParam(lam), n);
        CHECK(oracle::max_abs_diff(prox_conjugate(f, lam, x), oracle::prox_conjugate(f, sig, x)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("conjugate prox by hand")
{
  Gen g(109);
  Vec const v = g.normals(5, 10.0);
  CHECK(prox_conjugate(fn::Zero{}, 0.7, v) == Vec(5, 0.0));
  CHECK(prox_conjugate(fn::L1{1.0, {}}, 1.0, std::vector<double>{2, -0.5}) == Vec{1, -0.5});
  CHECK(prox_conjugate(fn::IndicatorNonneg{}, 3.0, std::vector<double>{-2, 0.5, 0}) == Vec{-2, 0, 0});
}

TEST_CASE("squared l2 conjugate: closed form agrees with the Moreau route")
{
  Gen g(113);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t const n = 1 + g.index(8);
    fn::SqL2 const f{g.uniform(0.01, 3.0), g.normals(n, 2.0)};
    StepParam const s = trial % 2 == 0 ? StepParam(g.uniform(0.01, 10.0)) : StepParam(DiagonalMetric(g.vec(n, 0.01, 10.0)));
    Vec const v = g.normals(n, 5.0);
    Vec const a = prox_conjugate(f, s, v);
    Vec const b = prox_conjugate_sql2_closed_form(f, s, v);
    CHECK(oracle::max_abs_diff(a, b) <= 1e-12 * (1.0 + oracle::norm(v)));
  }
}

TEST_CASE("diagonal conjugate prox agrees with the closed-form conjugates")
{
  Gen g(127);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t const n = 2 * (1 + g.index(4));
    for (auto const &f : random_family(g, n)) {
      if (std::holds_alternative<fn::L2Norm>(f)) { continue; }
      StepParam const s = random_step(g, f, n, true);
      Vec const v = g.normals(n, 3.0);
      CHECK(oracle::max_abs_diff(prox_conjugate(f, s, v), oracle::prox_conjugate(f, steps_of(s, n), v)) <= 1e-10);
    }
  }
  Vec const pair = {1.0, 2.0};
  CHECK_THROWS_AS(prox_conjugate(fn::GroupL12{1.0, 1}, DiagonalMetric({1.0, 2.0}), pair), std::invalid_argument);
}

TEST_CASE("prox is nonexpansive")
{
  Gen g(131);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t const n = 2 * (1 + g.index(5));
    for (auto const &f : random_family(g, n)) {
      StepParam const step = g.uniform(0.05, 5.0);
      Vec const u = g.normals(n, 3.0), v = g.normals(n, 3.0);
      Vec const pu = prox(f, step, u), pv = prox(f, step, v);
      Vec du(n), dp(n);
      for (std::size_t i = 0; i < n; ++i) {
        du[i] = u[i] - v[i];
        dp[i] = pu[i] - pv[i];
      }
      CHECK(oracle::norm(dp) <= oracle::norm(du) * (1.0 + 1e-12));
      // firm: ‖Pu − Pv‖² ≤ ⟨Pu − Pv, u − v⟩
      CHECK(oracle::dot(dp, dp) <= oracle::dot(dp, du) + 1e-12 * (1.0 + oracle::dot(du, du)));
    }
  }
}

TEST_CASE("diagonal steps with equal entries reproduce the scalar step")
{
  Gen g(137);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t const n = 2 * (1 + g.index(5));
    double const lam = g.uniform(0.05, 5.0);
    DiagonalMetric const d(Vec(n, lam));
    for (auto const &f : random_family(g, n)) {
      if (std::holds_alternative<fn::L2Norm>(f)) { continue; }
      Vec const v = g.normals(n, 3.0);
      CHECK(oracle::max_abs_diff(prox(f, d, v), prox(f, lam, v)) <= 1e-14);
      CHECK(oracle::max_abs_diff(prox_conjugate(f, d, v), prox_conjugate(f, lam, v)) <= 1e-14);
    }
  }
}

TEST_CASE("evaluate")
{
  Vec const v = {1, -2, 3, 0};
  CHECK(evaluate(fn::Zero{}, v) == 0.0);
  CHECK(evaluate(fn::L1{2.0, {}}, v) == 12.0);
  CHECK(evaluate(fn::L1{1.0, Vec{1, 1, 1, 1}}, v) == 6.0);
  CHECK(evaluate(fn::SqL2{1.0, {}}, v) == 7.0);
  CHECK(evaluate(fn::L2Norm{1.0, {}}, std::vector<double>{3, 4}) == 5.0);
  // pairs (1, 3) and (−2, 0)
  CHECK(evaluate(fn::GroupL12{1.0, 2}, v) == doctest::Approx(std::sqrt(10.0) + 2.0));
  CHECK(std::isinf(evaluate(fn::IndicatorNonneg{}, v)));
  CHECK(evaluate(fn::IndicatorNonneg{}, std::vector<double>{0, 1}) == 0.0);
  CHECK(std::isinf(evaluate(box(0.0, 1.0), std::vector<double>{0.5, 1.5})));
  CHECK(evaluate(box(0.0, 1.0), std::vector<double>{0.5, 1.0}) == 0.0);
}
