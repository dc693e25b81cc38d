#include "pdsplit/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pdsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void check_shift(std::span<const double> b, std::size_t n, char const *who)
{
  if (!b.empty() && b.size() != n) {
    throw std::invalid_argument(std::string(who) + ": shift has length " + std::to_string(b.size()) +
                                ", argument has length " + std::to_string(n));
  }
}

double shift_at(std::span<const double> b, std::size_t i) { return b.empty() ? 0.0 : b[i]; }

double bound_at(Vec const &bound, std::size_t i) { return bound.size() == 1 ? bound[0] : bound[i]; }

void check_bounds(fn::IndicatorBox const &c, std::size_t n)
{
  auto ok = [n](Vec const &v) { return v.size() == 1 || v.size() == n; };
  if (!ok(c.lo) || !ok(c.hi)) {
    throw std::invalid_argument("IndicatorBox: bounds of length " + std::to_string(c.lo.size()) + "/" +
                                std::to_string(c.hi.size()) + " do not fit argument of length " +
                                std::to_string(n));
  }
}

void check_group(std::size_t group_len, std::size_t n)
{
  if (n % 2 != 0) {
    throw std::invalid_argument("group_soft_threshold: argument length " + std::to_string(n) + " is odd");
  }
  if (group_len != 0 && 2 * group_len != n) {
    throw std::invalid_argument("GroupL12: argument length " + std::to_string(n) +
                                " is not twice the group length " + std::to_string(group_len));
  }
}

double shrink(double u, double t) { return std::copysign(std::max(std::abs(u) - t, 0.0), u); }

// Pairs (x_i, x_{m+i}) shrunk with threshold thr(i); both members of the
// pair must carry equal thresholds.
template <class Threshold> Vec group_shrink(std::span<const double> x, Threshold thr)
{
  check_group(0, x.size());
  std::size_t const m = x.size() / 2;
  Vec out(x.size());
  for (std::size_t i = 0; i < m; ++i) {
    double const t = thr(i);
    if (t != thr(m + i)) {
      throw std::invalid_argument("group prox: coordinates " + std::to_string(i) + " and " +
                                  std::to_string(m + i) + " of one group carry different steps");
    }
    double const a = x[i];
    double const b = x[m + i];
    double const nrm = std::hypot(a, b);
    if (nrm <= t) {
      out[i] = out[m + i] = 0.0;
    } else {
      double const scale = (nrm - t) / nrm;
      out[i] = scale * a;
      out[m + i] = scale * b;
    }
  }
  return out;
}

// Common prox kernel; step(i) is the per-coordinate step size.
template <class Step> Vec prox_with(ProxFunction const &f, Step step, std::span<const double> v)
{
  std::size_t const n = v.size();
  return std::visit(
    overloaded{
      [&](fn::Zero const &) { return Vec(v.begin(), v.end()); },
      [&](fn::L1 const &g) {
        check_shift(g.shift, n, "L1");
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i) {
          double const b = shift_at(g.shift, i);
          out[i] = b + shrink(v[i] - b, step(i) * g.weight);
        }
        return out;
      },
      [&](fn::SqL2 const &g) {
        check_shift(g.shift, n, "SqL2");
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i) {
          double const lw = step(i) * g.weight;
          out[i] = (v[i] + lw * shift_at(g.shift, i)) / (1.0 + lw);
        }
        return out;
      },
      [&](fn::L2Norm const &g) {
        check_shift(g.shift, n, "L2Norm");
        if (n == 0) { return Vec{}; }
        double const s = step(0);
        for (std::size_t i = 1; i < n; ++i) {
          if (step(i) != s) { throw std::invalid_argument("L2Norm prox: requires a uniform step"); }
        }
        if (g.weight == 0.0) { return Vec(v.begin(), v.end()); }
        return prox_l2norm(v, s * g.weight, g.shift);
      },
      [&](fn::GroupL12 const &g) {
        check_group(g.group_len, n);
        return group_shrink(v, [&](std::size_t i) { return step(i) * g.weight; });
      },
      [&](fn::IndicatorNonneg const &c) { return project(v, c); },
      [&](fn::IndicatorBox const &c) { return project(v, c); },
    },
    f);
}

} // namespace

void validate(ProxFunction const &f)
{
  auto weight = [](double w, char const *who) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(std::string(who) + ": weight must be finite and nonnegative");
    }
  };
  std::visit(overloaded{
               [](fn::Zero const &) {},
               [&](fn::L1 const &g) { weight(g.weight, "L1"); },
               [&](fn::SqL2 const &g) { weight(g.weight, "SqL2"); },
               [&](fn::L2Norm const &g) { weight(g.weight, "L2Norm"); },
               [&](fn::GroupL12 const &g) { weight(g.weight, "GroupL12"); },
               [](fn::IndicatorNonneg const &) {},
               [](fn::IndicatorBox const &c) {
                 if (c.lo.empty() || c.hi.empty()) { throw std::invalid_argument("IndicatorBox: empty bounds"); }
                 std::size_t const n = std::max(c.lo.size(), c.hi.size());
                 if ((c.lo.size() != 1 && c.lo.size() != n) || (c.hi.size() != 1 && c.hi.size() != n)) {
                   throw std::invalid_argument("IndicatorBox: lo and hi lengths disagree");
                 }
                 for (std::size_t i = 0; i < n; ++i) {
                   double const lo = bound_at(c.lo, i);
                   double const hi = bound_at(c.hi, i);
                   if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
                     throw std::invalid_argument("IndicatorBox: lo > hi at coordinate " + std::to_string(i));
                   }
                 }
               },
             },
             f);
}

fn::IndicatorBox box(double lo, double hi)
{
  fn::IndicatorBox c{{lo}, {hi}};
  validate(c);
  return c;
}

StepParam::StepParam(double scalar)
  : value_(scalar)
{
  if (!(scalar > 0.0) || !std::isfinite(scalar)) {
    throw std::invalid_argument("step must be a finite positive number, got " + std::to_string(scalar));
  }
}

void StepParam::check_length(std::size_t n) const
{
  if (!is_scalar() && diagonal().size() != n) {
    throw std::invalid_argument("diagonal step of length " + std::to_string(diagonal().size()) +
                                " applied to vector of length " + std::to_string(n));
  }
}

Vec soft_threshold(std::span<const double> u, StepParam const &lam)
{
  lam.check_length(u.size());
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) { out[i] = shrink(u[i], lam[i]); }
  return out;
}

Vec prox_l2norm(std::span<const double> u, double lam, std::span<const double> b)
{
  if (!(lam > 0.0)) { throw std::invalid_argument("prox_l2norm: lambda must be positive"); }
  check_shift(b, u.size(), "prox_l2norm");
  Vec d(u.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d[i] = u[i] - shift_at(b, i);
    ss += d[i] * d[i];
  }
  double const nrm = std::sqrt(ss);
  Vec out(u.size());
  double const scale = nrm <= lam ? 0.0 : (nrm - lam) / nrm;
  for (std::size_t i = 0; i < u.size(); ++i) { out[i] = scale * d[i] + shift_at(b, i); }
  return out;
}

Vec prox_shifted_l1(std::span<const double> u, StepParam const &lam, std::span<const double> b)
{
  lam.check_length(u.size());
  return prox(fn::L1{1.0, Vec(b.begin(), b.end())}, lam, u);
}

Vec prox_shifted_sql2(std::span<const double> u, StepParam const &lam, std::span<const double> b)
{
  lam.check_length(u.size());
  return prox(fn::SqL2{1.0, Vec(b.begin(), b.end())}, lam, u);
}

Vec group_soft_threshold(std::span<const double> x, StepParam const &lam)
{
  lam.check_length(x.size());
  return group_shrink(x, [&](std::size_t i) { return lam[i]; });
}

Vec project(std::span<const double> u, fn::IndicatorNonneg const &)
{
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) { out[i] = std::max(u[i], 0.0); }
  return out;
}

Vec project(std::span<const double> u, fn::IndicatorBox const &c)
{
  check_bounds(c, u.size());
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::clamp(u[i], bound_at(c.lo, i), bound_at(c.hi, i));
  }
  return out;
}

Vec prox(ProxFunction const &f, StepParam const &step, std::span<const double> v)
{
  validate(f);
  step.check_length(v.size());
  if (step.is_scalar()) {
    double const s = step.scalar();
    return prox_with(f, [s](std::size_t) { return s; }, v);
  }
  auto const d = step.diagonal().entries();
  return prox_with(f, [d](std::size_t i) { return d[i]; }, v);
}

// prox_{σf*}(v) = σ·(u − prox_{f/σ}(u)) with u = v/σ. Written this way the
// result is exactly zero wherever prox_{f/σ} leaves u unchanged.
Vec prox_conjugate(ProxFunction const &f, StepParam const &sigma, std::span<const double> v)
{
  validate(f);
  sigma.check_length(v.size());
  std::size_t const n = v.size();
  Vec u(n);
  for (std::size_t i = 0; i < n; ++i) { u[i] = v[i] / sigma[i]; }
  Vec p;
  if (sigma.is_scalar()) {
    double const inv = 1.0 / sigma.scalar();
    p = prox_with(f, [inv](std::size_t) { return inv; }, u);
  } else {
    auto const d = sigma.diagonal().entries();
    p = prox_with(f, [d](std::size_t i) { return 1.0 / d[i]; }, u);
  }
  for (std::size_t i = 0; i < n; ++i) { p[i] = sigma[i] * (u[i] - p[i]); }
  return p;
}

Vec prox_conjugate_sql2_closed_form(fn::SqL2 const &f, StepParam const &sigma, std::span<const double> v)
{
  sigma.check_length(v.size());
  check_shift(f.shift, v.size(), "SqL2");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double const s = sigma[i];
    out[i] = f.weight / (f.weight + s) * (v[i] - s * shift_at(f.shift, i));
  }
  return out;
}

double evaluate(ProxFunction const &f, std::span<const double> v)
{
  std::size_t const n = v.size();
  return std::visit(overloaded{
                      [](fn::Zero const &) { return 0.0; },
                      [&](fn::L1 const &g) {
                        check_shift(g.shift, n, "L1");
                        double s = 0.0;
                        for (std::size_t i = 0; i < n; ++i) { s += std::abs(v[i] - shift_at(g.shift, i)); }
                        return g.weight == 0.0 ? 0.0 : g.weight * s;
                      },
                      [&](fn::SqL2 const &g) {
                        check_shift(g.shift, n, "SqL2");
                        double s = 0.0;
                        for (std::size_t i = 0; i < n; ++i) {
                          double const d = v[i] - shift_at(g.shift, i);
                          s += d * d;
                        }
                        return g.weight == 0.0 ? 0.0 : 0.5 * g.weight * s;
                      },
                      [&](fn::L2Norm const &g) {
                        check_shift(g.shift, n, "L2Norm");
                        double s = 0.0;
                        for (std::size_t i = 0; i < n; ++i) {
                          double const d = v[i] - shift_at(g.shift, i);
                          s += d * d;
                        }
                        return g.weight == 0.0 ? 0.0 : g.weight * std::sqrt(s);
                      },
                      [&](fn::GroupL12 const &g) {
                        check_group(g.group_len, n);
                        std::size_t const m = n / 2;
                        double s = 0.0;
                        for (std::size_t i = 0; i < m; ++i) { s += std::hypot(v[i], v[m + i]); }
                        return g.weight == 0.0 ? 0.0 : g.weight * s;
                      },
                      [&](fn::IndicatorNonneg const &) {
                        for (double e : v) {
                          if (!(e >= 0.0)) { return kInf; }
                        }
                        return 0.0;
                      },
                      [&](fn::IndicatorBox const &c) {
                        check_bounds(c, n);
                        for (std::size_t i = 0; i < n; ++i) {
                          if (!(v[i] >= bound_at(c.lo, i) && v[i] <= bound_at(c.hi, i))) { return kInf; }
                        }
                        return 0.0;
                      },
                    },
                    f);
}

} // namespace pdsplit
