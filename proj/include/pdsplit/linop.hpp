#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pdsplit {

using Vec = std::vector<double>;

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(Shape const &, Shape const &) = default;
};

std::string to_string(Shape s);

/// A real linear map X -> Y with its adjoint.
///
/// Implementations are immutable once built. `apply_into` and
/// `apply_adjoint_into` write into caller-owned storage of the right length;
/// the free functions `apply` / `apply_adjoint` below check dimensions and
/// allocate.
class LinearOperator {
public:
  virtual ~LinearOperator() = default;

  virtual Shape shape() const = 0;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }

  virtual void apply_into(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_adjoint_into(std::span<const double> y, std::span<double> x) const = 0;

  // Σ_i |K(i,j)|^p per column and Σ_j |K(i,j)|^p per row, with 0^0 = 0.
  // Callers go through abs_pow_col_sums / abs_pow_row_sums, which validate p.
  virtual Vec abs_pow_col_sums_unchecked(double p) const = 0;
  virtual Vec abs_pow_row_sums_unchecked(double p) const = 0;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row.
class SparseMatrix final : public LinearOperator {
public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;

  /// Duplicate (row, col) pairs are summed. Out-of-range indices throw.
  static SparseMatrix from_triplets(Shape shape, std::vector<Triplet> triplets);
  /// Stores every nonzero of a row-major dense array.
  static SparseMatrix from_dense(Shape shape, std::span<const double> row_major);
  /// Takes ownership of CSR arrays after validating them.
  static SparseMatrix from_csr(Shape shape, std::vector<std::size_t> row_ptr,
                               std::vector<std::size_t> col_idx, Vec values);

  Shape shape() const override { return shape_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  double row_sum(std::size_t row) const;
  Vec to_dense() const;

  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  Shape shape_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  Vec values_;
};

class IdentityOperator final : public LinearOperator {
public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}

  Shape shape() const override { return {n_, n_}; }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  std::size_t n_;
};

/// Square diagonal matrix diag(d). Entries may be any real.
class DiagonalOperator final : public LinearOperator {
public:
  explicit DiagonalOperator(Vec diagonal) : d_(std::move(diagonal)) {}

  Shape shape() const override { return {d_.size(), d_.size()}; }
  std::span<const double> diagonal() const { return d_; }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  Vec d_;
};

/// Matrix-free D = [I⊗B; B⊗I] for an n×n image stored row-major
/// (pixel (r, c) at index r*n + c). B is the n×n forward-difference matrix
/// with a zero last row, so the first n² outputs are horizontal differences
/// x(r, c+1) - x(r, c) and the last n² are vertical differences
/// x(r+1, c) - x(r, c); differences leaving the image are zero.
class Grad2D final : public LinearOperator {
public:
  explicit Grad2D(std::size_t n);

  std::size_t side() const { return n_; }
  Shape shape() const override { return {2 * n_ * n_, n_ * n_}; }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  std::size_t n_;
};

/// Vertical block concatenation (K_1; K_2; ...; K_l).
class StackedOperator final : public LinearOperator {
public:
  explicit StackedOperator(std::vector<OperatorPtr> blocks);

  std::span<const OperatorPtr> blocks() const { return blocks_; }
  /// Row offset of block k in the stacked output; offsets()[l] == rows().
  std::span<const std::size_t> offsets() const { return offsets_; }

  Shape shape() const override { return {offsets_.back(), cols_}; }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  std::vector<OperatorPtr> blocks_;
  std::vector<std::size_t> offsets_;
  std::size_t cols_ = 0;
};

/// diag(left) · K · diag(right); used to inspect Σ^{1/2} K T^{1/2}.
class ScaledOperator final : public LinearOperator {
public:
  ScaledOperator(Vec left, OperatorPtr op, Vec right);

  Shape shape() const override { return op_->shape(); }
  void apply_into(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint_into(std::span<const double> y, std::span<double> x) const override;
  Vec abs_pow_col_sums_unchecked(double p) const override;
  Vec abs_pow_row_sums_unchecked(double p) const override;

private:
  Vec left_;
  OperatorPtr op_;
  Vec right_;
};

/// Vector of strictly positive per-coordinate step sizes.
class DiagonalMetric {
public:
  explicit DiagonalMetric(Vec entries);

  std::size_t size() const { return entries_->size(); }
  double operator[](std::size_t i) const { return (*entries_)[i]; }
  std::span<const double> entries() const { return *entries_; }

private:
  std::shared_ptr<const Vec> entries_;
};

struct Preconditioners {
  DiagonalMetric tau;
  std::vector<DiagonalMetric> sigmas;
};

// Dimension-checked application. Mismatches throw std::invalid_argument
// naming both the operator shape and the offending length.
// `apply` is an object so that apply(op, some_vector) never finds std::apply
// through argument-dependent lookup.
struct ApplyFn {
  Vec operator()(LinearOperator const &op, std::span<const double> x) const;
};
inline constexpr ApplyFn apply{};
Vec apply_adjoint(LinearOperator const &op, std::span<const double> y);

std::shared_ptr<const Grad2D> grad_2d(std::size_t n);
std::shared_ptr<const StackedOperator> stack(std::vector<OperatorPtr> ops);

/// Estimate of the largest singular value of `op` by power iteration on
/// op*op. The returned value is ‖op v‖ for the final unit iterate v, so it
/// never exceeds the true norm. Stops when successive estimates of ‖op‖²
/// agree to `tol` relatively.
double power_iteration(LinearOperator const &op, std::size_t max_iters = 1000,
                       double tol = 1e-10, std::uint64_t seed = 0);

Vec abs_pow_col_sums(LinearOperator const &op, double p);
Vec abs_pow_row_sums(LinearOperator const &op, double p);

/// Diagonal steps τ_j = 1/Σ_k Σ_i |K_k(i,j)|^{2-α} and
/// σ^k_i = 1/Σ_j |K_k(i,j)|^α. Coordinates with a zero sum get `fallback`.
///
/// `group_lens[k] > 0` marks block k as carrying paired groups
/// (i, group_len + i); both members of a pair then receive the smaller of
/// their two σ values so that a group prox can share one step. An empty
/// `group_lens` means no grouping.
Preconditioners build_preconditioners(std::span<const OperatorPtr> ops, double alpha,
                                      std::span<const std::size_t> group_lens = {},
                                      double fallback = 1.0);

// Matrix Market coordinate real general, values at 17 significant digits.
void write_matrix_market(std::ostream &out, SparseMatrix const &m);
SparseMatrix read_matrix_market(std::istream &in);
void write_matrix_market(std::string const &path, SparseMatrix const &m);
SparseMatrix read_matrix_market(std::string const &path);

} // namespace pdsplit
