#pragma once

#include "pdsplit/linop.hpp"
#include "pdsplit/prox.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>

namespace pdsplit {

struct Term {
  ProxFunction f;
  OperatorPtr k;
};

/// min_x G(x) + Σ_i F_i(K_i x)
struct Problem {
  ProxFunction g = fn::Zero{};
  std::vector<Term> terms;

  std::size_t primal_size() const { return terms.empty() ? 0 : terms.front().k->cols(); }
  /// Throws std::invalid_argument if terms are empty, operators disagree on
  /// their column count, or a function is invalid.
  void validate() const;
  std::vector<OperatorPtr> operators() const;
};

struct FixedSteps {
  double tau = 0.0;
  double sigma = 0.0;
  double theta = 1.0;
};

/// Diagonal T and Σ_i built from the operators with exponent alpha.
struct PreconditionedSteps {
  double alpha = 1.0;
  double theta = 1.0;
};

using StepPolicy = std::variant<FixedSteps, PreconditionedSteps>;

struct StopRule {
  double epsilon = 1e-4;
  std::size_t max_iter = 40000;
};

struct HistoryEntry {
  std::size_t iteration = 0;
  double relative_change = 0.0;
  double objective = 0.0;
  std::optional<double> snr_db;
};

struct SolveResult {
  Vec x;
  std::vector<Vec> ys;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<HistoryEntry> history;
};

struct SolveOptions {
  /// History cadence; the final iterate is always recorded.
  std::size_t log_every = 50;
  /// Seed of the power iteration behind the fixed-step safety check.
  std::uint64_t seed = 0;
  /// Optional quality metric recorded in the history (e.g. SNR against a
  /// known image).
  std::function<double(std::span<const double>)> metric;
  /// Called after every iteration k = 1, 2, ... with x^k and y^k.
  std::function<void(std::size_t, std::span<const double>, std::vector<Vec> const &)> observer;
};

/// Thrown when iterates stop being finite; carries the iteration index.
class SolverError : public std::runtime_error {
public:
  SolverError(std::string const &what, std::size_t iteration)
    : std::runtime_error(what), iteration_(iteration)
  {
  }
  std::size_t iteration() const { return iteration_; }

private:
  std::size_t iteration_;
};

/// Splitting primal-dual iteration:
///   x^{k+1}   = prox_{T G}(x^k − T Σ_i K_i* y_i^k)
///   x̄         = x^{k+1} + θ (x^{k+1} − x^k)
///   y_i^{k+1} = prox_{Σ_i F_i*}(y_i^k + Σ_i K_i x̄)
/// with scalar (τ, σ) or diagonal (T, Σ_i) steps. Stops at the first k with
/// ‖x^{k+1} − x^k‖ / max(‖x^k‖, 1e-12) ≤ ε, or after max_iter iterations.
/// Empty x0 / y0s mean zero starts.
SolveResult solve(Problem const &problem, StepPolicy const &policy, StopRule const &stop, Vec x0 = {},
                  std::vector<Vec> y0s = {}, SolveOptions const &options = {});

/// τ = σ = 0.99/‖K̃‖ with ‖K̃‖ estimated by power iteration on the stacked
/// operator; τ = σ = 1 for a zero operator.
std::pair<double, double> default_fixed_steps(Problem const &problem, std::uint64_t seed = 0);

/// Power-iteration estimate of ‖(K_1; ...; K_l)‖.
double stacked_norm(Problem const &problem, std::uint64_t seed = 0);

/// G(x) + Σ_i F_i(K_i x); +∞ when an indicator is violated.
double objective_value(Problem const &problem, std::span<const double> x);

/// ‖x − prox_G(x − Σ K_i* y_i)‖ + Σ_i ‖y_i − prox_{F_i*}(y_i + K_i x)‖;
/// zero exactly at saddle points.
double saddle_gap_report(Problem const &problem, std::span<const double> x, std::vector<Vec> const &ys);

} // namespace pdsplit
