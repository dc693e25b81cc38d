#pragma once

#include "pdsplit/linop.hpp"

#include <span>
#include <variant>

namespace pdsplit {

// Function family. Shift vectors may be empty (meaning b = 0); bound vectors
// may hold a single value that applies to every coordinate.
namespace fn {

/// f = 0
struct Zero {};
/// f(v) = weight·‖v − shift‖₁
struct L1 {
  double weight = 1.0;
  Vec shift;
};
/// f(v) = ½·weight·‖v − shift‖₂²
struct SqL2 {
  double weight = 1.0;
  Vec shift;
};
/// f(v) = weight·‖v − shift‖₂
struct L2Norm {
  double weight = 1.0;
  Vec shift;
};
/// f(v) = weight·Σ_i ‖(v_i, v_{m+i})‖₂ with m = group_len, len(v) = 2m.
struct GroupL12 {
  double weight = 1.0;
  std::size_t group_len = 0;
};
/// ι_{v ≥ 0}
struct IndicatorNonneg {};
/// ι_{lo ≤ v ≤ hi}; bounds may be ±∞.
struct IndicatorBox {
  Vec lo;
  Vec hi;
};

} // namespace fn

using ProxFunction =
  std::variant<fn::Zero, fn::L1, fn::SqL2, fn::L2Norm, fn::GroupL12, fn::IndicatorNonneg, fn::IndicatorBox>;

/// Checks weight ≥ 0 and box ordering; throws std::invalid_argument.
void validate(ProxFunction const &f);

/// Uniform box [lo, hi].
fn::IndicatorBox box(double lo, double hi);

/// Scalar step λ > 0 or per-coordinate steps.
class StepParam {
public:
  StepParam(double scalar);
  StepParam(DiagonalMetric diagonal) : value_(std::move(diagonal)) {}

  bool is_scalar() const { return std::holds_alternative<double>(value_); }
  double scalar() const { return std::get<double>(value_); }
  DiagonalMetric const &diagonal() const { return std::get<DiagonalMetric>(value_); }
  double operator[](std::size_t i) const
  {
    return is_scalar() ? std::get<double>(value_) : std::get<DiagonalMetric>(value_)[i];
  }
  /// Throws unless the step is scalar or a diagonal of length n.
  void check_length(std::size_t n) const;

private:
  std::variant<double, DiagonalMetric> value_;
};

/// max(|u_i| − λ_i, 0)·sign(u_i)
Vec soft_threshold(std::span<const double> u, StepParam const &lam);

/// b + max(‖u − b‖ − λ, 0)·(u − b)/‖u − b‖; empty b means zero.
Vec prox_l2norm(std::span<const double> u, double lam, std::span<const double> b);

/// b + soft(u − b, λ)
Vec prox_shifted_l1(std::span<const double> u, StepParam const &lam, std::span<const double> b);

/// (u + λ b)/(1 + λ)
Vec prox_shifted_sql2(std::span<const double> u, StepParam const &lam, std::span<const double> b);

/// Shrinks each pair (x_i, x_{m+i}) of a length-2m vector toward the origin.
/// Both members of a pair must carry the same step.
Vec group_soft_threshold(std::span<const double> x, StepParam const &lam);

/// Projection onto the nonnegative orthant or a box.
Vec project(std::span<const double> u, fn::IndicatorNonneg const &c);
Vec project(std::span<const double> u, fn::IndicatorBox const &c);

/// argmin_y f(y) + Σ_i (y_i − v_i)²/(2·step_i)
Vec prox(ProxFunction const &f, StepParam const &step, std::span<const double> v);

/// prox_{σ f*}(v) through Moreau's identity, evaluated per coordinate
/// (per group for GroupL12) when σ is diagonal.
Vec prox_conjugate(ProxFunction const &f, StepParam const &sigma, std::span<const double> v);

/// Closed form w/(w + σ)·(v − σ b) of prox_{σ f*} for f = ½w‖· − b‖².
Vec prox_conjugate_sql2_closed_form(fn::SqL2 const &f, StepParam const &sigma, std::span<const double> v);

/// f(v); +∞ outside an indicator's set.
double evaluate(ProxFunction const &f, std::span<const double> v);

} // namespace pdsplit
