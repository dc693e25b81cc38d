#include "pdsplit/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pdsplit::tomo {

namespace {

constexpr Ellipse kModifiedSheppLogan[] = {
  {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
  {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
  {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
  {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
  {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
  {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
  {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
  {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
  {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
  {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

ProxFunction constraint_function(Constraint const &c)
{
  switch (c.kind) {
  case Constraint::Kind::None: return fn::Zero{};
  case Constraint::Kind::Nonneg: return fn::IndicatorNonneg{};
  case Constraint::Kind::Box: return box(c.lo, c.hi);
  }
  throw std::logic_error("unknown constraint kind");
}

} // namespace

std::span<const Ellipse> modified_shepp_logan() { return kModifiedSheppLogan; }

Vec render_ellipses(std::size_t n, std::span<const Ellipse> ellipses)
{
  if (n < 1) { throw std::invalid_argument("phantom: n must be at least 1"); }
  Vec img(n * n, 0.0);
  double const h = 0.5 * double(n);
  for (auto const &e : ellipses) {
    double const phi = e.angle_deg * std::numbers::pi / 180.0;
    double const cp = std::cos(phi);
    double const sp = std::sin(phi);
    double const a2 = e.semi_x * e.semi_x;
    double const b2 = e.semi_y * e.semi_y;
    for (std::size_t r = 0; r < n; ++r) {
      double const y = (h - double(r) - 0.5) / h - e.center_y;
      for (std::size_t c = 0; c < n; ++c) {
        double const x = (double(c) + 0.5 - h) / h - e.center_x;
        double const u = x * cp + y * sp;
        double const v = -x * sp + y * cp;
        if (u * u / a2 + v * v / b2 <= 1.0) { img[r * n + c] += e.intensity; }
      }
    }
  }
  return img;
}

Vec shepp_logan(std::size_t n)
{
  Vec img = render_ellipses(n, modified_shepp_logan());
  for (auto &v : img) { v = std::clamp(v, 0.0, 1.0); }
  return img;
}

NoisyData add_noise_with_report(std::span<const double> b, NoiseSpec const &spec)
{
  if (!(spec.gaussian_sigma >= 0.0) || !std::isfinite(spec.gaussian_sigma)) {
    throw std::invalid_argument("add_noise: gaussian_sigma must be finite and nonnegative");
  }
  if (!(spec.impulse_fraction >= 0.0 && spec.impulse_fraction <= 1.0)) {
    throw std::invalid_argument("add_noise: impulse_fraction must lie in [0, 1]");
  }
  if (!(spec.impulse_scale >= 0.0) || !std::isfinite(spec.impulse_scale)) {
    throw std::invalid_argument("add_noise: impulse_scale must be finite and nonnegative");
  }
  NoisyData out;
  out.values.assign(b.begin(), b.end());
  std::mt19937_64 rng(spec.seed);
  if (spec.gaussian_sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto &v : out.values) { v += spec.gaussian_sigma * normal(rng); }
  }
  if (spec.impulse_fraction > 0.0) {
    double peak = 0.0;
    for (double v : b) { peak = std::max(peak, std::abs(v)); }
    double const hi = spec.impulse_scale * peak;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (unit(rng) < spec.impulse_fraction) {
        out.values[i] = hi * unit(rng);
        out.corrupted.push_back(i);
      }
    }
  }
  return out;
}

Vec add_noise(std::span<const double> b, NoiseSpec const &spec) { return add_noise_with_report(b, spec).values; }

NoiseSpec default_noise(std::span<const double> b, std::uint64_t seed)
{
  double mean_abs = 0.0;
  for (double v : b) { mean_abs += std::abs(v); }
  if (!b.empty()) { mean_abs /= double(b.size()); }
  return {0.01 * mean_abs, 0.05, 1.0, seed};
}

double snr_db(std::span<const double> x_true, std::span<const double> x_rec, bool literal)
{
  if (x_true.size() != x_rec.size()) {
    throw std::invalid_argument("snr_db: lengths differ (" + std::to_string(x_true.size()) + " vs " +
                                std::to_string(x_rec.size()) + ")");
  }
  double signal = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < x_true.size(); ++i) {
    signal += x_true[i] * x_true[i];
    double const d = x_true[i] - x_rec[i];
    error += d * d;
  }
  if (signal == 0.0) { throw std::invalid_argument("snr_db: reference image is zero"); }
  if (error == 0.0) { return std::numeric_limits<double>::infinity(); }
  double const ratio = std::log10(signal / error);
  return literal ? ratio : 10.0 * ratio;
}

void CtModelSpec::validate() const
{
  if (!(w1 >= 0.0 && w1 <= 1.0) || !(w2 >= 0.0 && w2 <= 1.0)) {
    throw std::invalid_argument("model: w1 and w2 must lie in [0, 1]");
  }
  if (std::abs(w1 + w2 - 1.0) > 1e-12) { throw std::invalid_argument("model: w1 + w2 must equal 1"); }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) { throw std::invalid_argument("model: lambda must be positive"); }
  if (constraint.kind == Constraint::Kind::Box && !(constraint.lo <= constraint.hi)) {
    throw std::invalid_argument("model: box constraint needs lo <= hi");
  }
}

Problem build_ct_problem(std::shared_ptr<const SparseMatrix> a, Vec b, std::size_t n, CtModelSpec const &spec)
{
  spec.validate();
  if (!a) { throw std::invalid_argument("build_ct_problem: missing system matrix"); }
  if (a->cols() != n * n) {
    throw std::invalid_argument("build_ct_problem: system matrix " + to_string(a->shape()) +
                                " does not match a " + std::to_string(n) + "x" + std::to_string(n) + " image");
  }
  if (b.size() != a->rows()) {
    throw std::invalid_argument("build_ct_problem: data has length " + std::to_string(b.size()) + ", expected " +
                                std::to_string(a->rows()));
  }

  Problem p;
  p.terms.push_back({fn::SqL2{spec.w1, b}, a});
  p.terms.push_back({fn::L1{spec.w2, std::move(b)}, a});
  ProxFunction tv = spec.tv == TvKind::Anisotropic ? ProxFunction{fn::L1{spec.lambda, {}}}
                                                   : ProxFunction{fn::GroupL12{spec.lambda, n * n}};
  p.terms.push_back({std::move(tv), grad_2d(n)});
  if (spec.method == Method::ConstraintAsTerm) {
    p.g = fn::Zero{};
    p.terms.push_back({constraint_function(spec.constraint), std::make_shared<const IdentityOperator>(n * n)});
  } else {
    p.g = constraint_function(spec.constraint);
  }
  return p;
}

Problem build_ct_problem(TomoProblem const &tomo, CtModelSpec const &spec)
{
  return build_ct_problem(tomo.a, tomo.b, tomo.geometry.n, spec);
}

} // namespace pdsplit::tomo
