#include "pdsplit/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pdsplit {

namespace {

constexpr double kStepSlack = 1e-6;
constexpr double kMinDenominator = 1e-12;

double norm2(std::span<const double> v)
{
  double s = 0.0;
  for (double e : v) { s += e * e; }
  return std::sqrt(s);
}

double diff_norm(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v)
{
  for (double e : v) {
    if (!std::isfinite(e)) { return false; }
  }
  return true;
}

// ‖Δ‖ / max(‖x^k‖, 1e-12). A zero step taken from the origin carries no
// information about convergence and is reported as +∞.
double relative_change(double step, double base)
{
  if (base == 0.0 && step == 0.0) { return std::numeric_limits<double>::infinity(); }
  return step / std::max(base, kMinDenominator);
}

// Pair length of a grouped dual block, 0 when the block is not grouped.
std::size_t group_len_of(ProxFunction const &f, std::size_t rows)
{
  if (auto const *g = std::get_if<fn::GroupL12>(&f)) { return g->group_len == 0 ? rows / 2 : g->group_len; }
  return 0;
}

} // namespace

void Problem::validate() const
{
  if (terms.empty()) { throw std::invalid_argument("Problem: at least one (F, K) term is required"); }
  pdsplit::validate(g);
  std::size_t const n = terms.front().k ? terms.front().k->cols() : 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].k) { throw std::invalid_argument("Problem: term " + std::to_string(i) + " has no operator"); }
    if (terms[i].k->cols() != n) {
      throw std::invalid_argument("Problem: operator of term " + std::to_string(i) + " has shape " +
                                  to_string(terms[i].k->shape()) + ", expected " + std::to_string(n) +
                                  " columns");
    }
    pdsplit::validate(terms[i].f);
  }
}

std::vector<OperatorPtr> Problem::operators() const
{
  std::vector<OperatorPtr> ops;
  ops.reserve(terms.size());
  for (auto const &t : terms) { ops.push_back(t.k); }
  return ops;
}

double stacked_norm(Problem const &problem, std::uint64_t seed)
{
  problem.validate();
  StackedOperator const k(problem.operators());
  return power_iteration(k, 2000, 1e-9, seed);
}

std::pair<double, double> default_fixed_steps(Problem const &problem, std::uint64_t seed)
{
  double const l = stacked_norm(problem, seed);
  if (l == 0.0) { return {1.0, 1.0}; }
  double const s = 0.99 / l;
  return {s, s};
}

double objective_value(Problem const &problem, std::span<const double> x)
{
  problem.validate();
  if (x.size() != problem.primal_size()) {
    throw std::invalid_argument("objective_value: x has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(problem.primal_size()));
  }
  double total = evaluate(problem.g, x);
  for (auto const &t : problem.terms) { total += evaluate(t.f, apply(*t.k, x)); }
  return total;
}

double saddle_gap_report(Problem const &problem, std::span<const double> x, std::vector<Vec> const &ys)
{
  problem.validate();
  if (ys.size() != problem.terms.size()) {
    throw std::invalid_argument("saddle_gap_report: expected " + std::to_string(problem.terms.size()) +
                                " dual vectors, got " + std::to_string(ys.size()));
  }
  std::size_t const n = problem.primal_size();
  Vec s(n, 0.0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Vec const kt = apply_adjoint(*problem.terms[i].k, ys[i]);
    for (std::size_t j = 0; j < n; ++j) { s[j] += kt[j]; }
  }
  Vec w(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) { w[j] -= s[j]; }
  double gap = diff_norm(x, prox(problem.g, 1.0, w));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Vec u = apply(*problem.terms[i].k, x);
    for (std::size_t r = 0; r < u.size(); ++r) { u[r] += ys[i][r]; }
    gap += diff_norm(ys[i], prox_conjugate(problem.terms[i].f, 1.0, u));
  }
  return gap;
}

SolveResult solve(Problem const &problem, StepPolicy const &policy, StopRule const &stop, Vec x0,
                  std::vector<Vec> y0s, SolveOptions const &options)
{
  problem.validate();
  if (!(stop.epsilon > 0.0)) { throw std::invalid_argument("StopRule: epsilon must be positive"); }
  if (stop.max_iter < 1) { throw std::invalid_argument("StopRule: max_iter must be at least 1"); }
  if (options.log_every < 1) { throw std::invalid_argument("solve: log_every must be at least 1"); }

  std::size_t const n = problem.primal_size();
  std::size_t const l = problem.terms.size();

  if (x0.empty()) { x0.assign(n, 0.0); }
  if (x0.size() != n) {
    throw std::invalid_argument("solve: x0 has length " + std::to_string(x0.size()) + ", expected " +
                                std::to_string(n));
  }
  if (y0s.empty()) {
    for (auto const &t : problem.terms) { y0s.emplace_back(t.k->rows(), 0.0); }
  }
  if (y0s.size() != l) {
    throw std::invalid_argument("solve: expected " + std::to_string(l) + " dual starts, got " +
                                std::to_string(y0s.size()));
  }
  for (std::size_t i = 0; i < l; ++i) {
    if (y0s[i].size() != problem.terms[i].k->rows()) {
      throw std::invalid_argument("solve: dual start " + std::to_string(i) + " has length " +
                                  std::to_string(y0s[i].size()) + ", expected " +
                                  std::to_string(problem.terms[i].k->rows()));
    }
  }

  // Step sizes: scalars, or diagonals from the operators.
  std::optional<StepParam> primal_step;
  std::vector<StepParam> dual_steps;
  double theta = 1.0;
  if (auto const *fixed = std::get_if<FixedSteps>(&policy)) {
    if (!(fixed->tau > 0.0) || !(fixed->sigma > 0.0)) {
      throw std::invalid_argument("FixedSteps: tau and sigma must be positive");
    }
    theta = fixed->theta;
    double const norm = stacked_norm(problem, options.seed);
    double const product = fixed->tau * fixed->sigma * norm * norm;
    if (product > 1.0 + kStepSlack) {
      throw std::invalid_argument("FixedSteps: tau*sigma*|K|^2 = " + std::to_string(product) +
                                  " exceeds 1 (tau=" + std::to_string(fixed->tau) +
                                  ", sigma=" + std::to_string(fixed->sigma) +
                                  ", estimated |K| = " + std::to_string(norm) + ")");
    }
    primal_step.emplace(fixed->tau);
    dual_steps.assign(l, StepParam(fixed->sigma));
  } else {
    auto const &pre = std::get<PreconditionedSteps>(policy);
    theta = pre.theta;
    std::vector<std::size_t> groups;
    for (auto const &t : problem.terms) { groups.push_back(group_len_of(t.f, t.k->rows())); }
    auto const ops = problem.operators();
    Preconditioners p = build_preconditioners(ops, pre.alpha, groups);
    primal_step.emplace(std::move(p.tau));
    for (auto &s : p.sigmas) { dual_steps.emplace_back(std::move(s)); }
  }
  if (!(theta >= 0.0 && theta <= 1.0)) { throw std::invalid_argument("theta must lie in [0, 1]"); }
  StepParam const &tstep = *primal_step;

  SolveResult result;
  result.x = std::move(x0);
  result.ys = std::move(y0s);
  Vec &x = result.x;
  std::vector<Vec> &ys = result.ys;

  Vec sum(n), tmp(n), w(n), xbar(n);
  std::vector<Vec> kx(l);
  for (std::size_t i = 0; i < l; ++i) { kx[i].resize(problem.terms[i].k->rows()); }

  for (std::size_t k = 1; k <= stop.max_iter; ++k) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t i = 0; i < l; ++i) {
      problem.terms[i].k->apply_adjoint_into(ys[i], tmp);
      for (std::size_t j = 0; j < n; ++j) { sum[j] += tmp[j]; }
    }
    for (std::size_t j = 0; j < n; ++j) { w[j] = x[j] - tstep[j] * sum[j]; }
    Vec xn = prox(problem.g, tstep, w);

    for (std::size_t j = 0; j < n; ++j) { xbar[j] = xn[j] + theta * (xn[j] - x[j]); }
    for (std::size_t i = 0; i < l; ++i) {
      problem.terms[i].k->apply_into(xbar, kx[i]);
      Vec &y = ys[i];
      StepParam const &s = dual_steps[i];
      for (std::size_t r = 0; r < y.size(); ++r) { kx[i][r] = y[r] + s[r] * kx[i][r]; }
      y = prox_conjugate(problem.terms[i].f, s, kx[i]);
    }

    double const step = diff_norm(xn, x);
    double const base = norm2(x);
    double const rel = relative_change(step, base);
    if (!std::isfinite(step) || !all_finite(xn)) {
      throw SolverError("solve: non-finite primal iterate at iteration " + std::to_string(k), k);
    }
    for (std::size_t i = 0; i < l; ++i) {
      if (!all_finite(ys[i])) {
        throw SolverError("solve: non-finite dual iterate " + std::to_string(i) + " at iteration " +
                            std::to_string(k),
                          k);
      }
    }
    x = std::move(xn);
    result.iterations = k;
    if (options.observer) { options.observer(k, x, ys); }

    bool const done = rel <= stop.epsilon;
    if (done || k % options.log_every == 0 || k == stop.max_iter) {
      HistoryEntry e{k, rel, objective_value(problem, x), std::nullopt};
      if (options.metric) { e.snr_db = options.metric(x); }
      result.history.push_back(e);
    }
    if (done) {
      result.converged = true;
      break;
    }
  }
  return result;
}

} // namespace pdsplit
