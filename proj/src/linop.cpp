#include "pdsplit/linop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pdsplit {

namespace {

// |v|^p with 0^0 = 0, so p = 0 counts nonzeros.
double abs_pow(double v, double p)
{
  double const a = std::abs(v);
  if (a == 0.0) { return 0.0; }
  if (p == 0.0) { return 1.0; }
  if (p == 1.0) { return a; }
  if (p == 2.0) { return a * a; }
  return std::pow(a, p);
}

void check_power(double p)
{
  if (!(p >= 0.0 && p <= 2.0)) {
    throw std::invalid_argument("abs_pow sums: exponent " + std::to_string(p) + " outside [0, 2]");
  }
}

void check_len(char const *what, Shape s, std::size_t expected, std::size_t got)
{
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": operator of shape " + to_string(s) +
                                " expects length " + std::to_string(expected) + ", got " +
                                std::to_string(got));
  }
}

double norm2(std::span<const double> v)
{
  double s = 0.0;
  for (double e : v) { s += e * e; }
  return std::sqrt(s);
}

} // namespace

std::string to_string(Shape s)
{
  return "(" + std::to_string(s.rows) + " x " + std::to_string(s.cols) + ")";
}

// SparseMatrix ---------------------------------------------------------------

SparseMatrix SparseMatrix::from_triplets(Shape shape, std::vector<Triplet> triplets)
{
  for (auto const &t : triplets) {
    if (t.row >= shape.rows || t.col >= shape.cols) {
      throw std::invalid_argument("SparseMatrix: entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") outside shape " + to_string(shape));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](Triplet const &a, Triplet const &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.shape_ = shape;
  m.row_ptr_.assign(shape.rows + 1, 0);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t last_row = shape.rows;
  for (auto const &t : triplets) {
    if (t.row == last_row && !m.col_idx_.empty() && m.col_idx_.back() == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    m.row_ptr_[t.row + 1]++;
    last_row = t.row;
  }
  std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
  return m;
}

SparseMatrix SparseMatrix::from_dense(Shape shape, std::span<const double> row_major)
{
  if (row_major.size() != shape.rows * shape.cols) {
    throw std::invalid_argument("SparseMatrix::from_dense: " + std::to_string(row_major.size()) +
                                " values for shape " + to_string(shape));
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < shape.rows; ++i) {
    for (std::size_t j = 0; j < shape.cols; ++j) {
      double const v = row_major[i * shape.cols + j];
      if (v != 0.0) { t.push_back({i, j, v}); }
    }
  }
  return from_triplets(shape, std::move(t));
}

SparseMatrix SparseMatrix::from_csr(Shape shape, std::vector<std::size_t> row_ptr,
                                    std::vector<std::size_t> col_idx, Vec values)
{
  if (row_ptr.size() != shape.rows + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != col_idx.size() || col_idx.size() != values.size()) {
    throw std::invalid_argument("SparseMatrix::from_csr: inconsistent array lengths");
  }
  for (std::size_t i = 0; i < shape.rows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) {
      throw std::invalid_argument("SparseMatrix::from_csr: row_ptr not monotone at row " +
                                  std::to_string(i));
    }
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_idx[k] >= shape.cols || (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])) {
        throw std::invalid_argument("SparseMatrix::from_csr: bad column index in row " +
                                    std::to_string(i));
      }
    }
  }
  SparseMatrix m;
  m.shape_ = shape;
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

double SparseMatrix::row_sum(std::size_t row) const
{
  double s = 0.0;
  for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) { s += values_[k]; }
  return s;
}

Vec SparseMatrix::to_dense() const
{
  Vec d(shape_.rows * shape_.cols, 0.0);
  for (std::size_t i = 0; i < shape_.rows; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      d[i * shape_.cols + col_idx_[k]] = values_[k];
    }
  }
  return d;
}

void SparseMatrix::apply_into(std::span<const double> x, std::span<double> y) const
{
  for (std::size_t i = 0; i < shape_.rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) { s += values_[k] * x[col_idx_[k]]; }
    y[i] = s;
  }
}

void SparseMatrix::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < shape_.rows; ++i) {
    double const yi = y[i];
    if (yi == 0.0) { continue; }
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) { x[col_idx_[k]] += values_[k] * yi; }
  }
}

Vec SparseMatrix::abs_pow_col_sums_unchecked(double p) const
{
  Vec s(shape_.cols, 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) { s[col_idx_[k]] += abs_pow(values_[k], p); }
  return s;
}

Vec SparseMatrix::abs_pow_row_sums_unchecked(double p) const
{
  Vec s(shape_.rows, 0.0);
  for (std::size_t i = 0; i < shape_.rows; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) { s[i] += abs_pow(values_[k], p); }
  }
  return s;
}

// Identity / Diagonal --------------------------------------------------------

void IdentityOperator::apply_into(std::span<const double> x, std::span<double> y) const
{
  std::copy(x.begin(), x.end(), y.begin());
}

void IdentityOperator::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  std::copy(y.begin(), y.end(), x.begin());
}

Vec IdentityOperator::abs_pow_col_sums_unchecked(double) const { return Vec(n_, 1.0); }
Vec IdentityOperator::abs_pow_row_sums_unchecked(double) const { return Vec(n_, 1.0); }

void DiagonalOperator::apply_into(std::span<const double> x, std::span<double> y) const
{
  for (std::size_t i = 0; i < d_.size(); ++i) { y[i] = d_[i] * x[i]; }
}

void DiagonalOperator::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  apply_into(y, x);
}

Vec DiagonalOperator::abs_pow_col_sums_unchecked(double p) const
{
  Vec s(d_.size());
  std::transform(d_.begin(), d_.end(), s.begin(), [p](double v) { return abs_pow(v, p); });
  return s;
}

Vec DiagonalOperator::abs_pow_row_sums_unchecked(double p) const { return abs_pow_col_sums_unchecked(p); }

// Grad2D ---------------------------------------------------------------------

Grad2D::Grad2D(std::size_t n)
  : n_(n)
{
  if (n == 0) { throw std::invalid_argument("Grad2D: image side must be at least 1"); }
}

void Grad2D::apply_into(std::span<const double> x, std::span<double> y) const
{
  std::size_t const n = n_;
  std::size_t const N = n * n;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t const i = r * n + c;
      y[i] = c + 1 < n ? x[i + 1] - x[i] : 0.0;
      y[N + i] = r + 1 < n ? x[i + n] - x[i] : 0.0;
    }
  }
}

void Grad2D::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  std::size_t const n = n_;
  std::size_t const N = n * n;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t const i = r * n + c;
      double v = 0.0;
      if (c + 1 < n) { v -= y[i]; }
      if (c > 0) { v += y[i - 1]; }
      if (r + 1 < n) { v -= y[N + i]; }
      if (r > 0) { v += y[N + i - n]; }
      x[i] = v;
    }
  }
}

// Every nonzero of D is ±1, so the sums are nonzero counts for any p.
Vec Grad2D::abs_pow_col_sums_unchecked(double) const
{
  std::size_t const n = n_;
  Vec s(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      s[r * n + c] = double((c + 1 < n) + (c > 0) + (r + 1 < n) + (r > 0));
    }
  }
  return s;
}

Vec Grad2D::abs_pow_row_sums_unchecked(double) const
{
  std::size_t const n = n_;
  std::size_t const N = n * n;
  Vec s(2 * N, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t const i = r * n + c;
      if (c + 1 < n) { s[i] = 2.0; }
      if (r + 1 < n) { s[N + i] = 2.0; }
    }
  }
  return s;
}

// StackedOperator ------------------------------------------------------------

StackedOperator::StackedOperator(std::vector<OperatorPtr> blocks)
  : blocks_(std::move(blocks))
{
  if (blocks_.empty()) { throw std::invalid_argument("stack: no operators given"); }
  cols_ = blocks_.front()->cols();
  offsets_.push_back(0);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (!blocks_[k]) { throw std::invalid_argument("stack: null operator at block " + std::to_string(k)); }
    if (blocks_[k]->cols() != cols_) {
      throw std::invalid_argument("stack: block " + std::to_string(k) + " has shape " +
                                  to_string(blocks_[k]->shape()) + " but block 0 has " +
                                  std::to_string(cols_) + " columns");
    }
    offsets_.push_back(offsets_.back() + blocks_[k]->rows());
  }
}

void StackedOperator::apply_into(std::span<const double> x, std::span<double> y) const
{
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    blocks_[k]->apply_into(x, y.subspan(offsets_[k], offsets_[k + 1] - offsets_[k]));
  }
}

void StackedOperator::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  std::fill(x.begin(), x.end(), 0.0);
  Vec tmp(cols_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    blocks_[k]->apply_adjoint_into(y.subspan(offsets_[k], offsets_[k + 1] - offsets_[k]), tmp);
    for (std::size_t j = 0; j < cols_; ++j) { x[j] += tmp[j]; }
  }
}

Vec StackedOperator::abs_pow_col_sums_unchecked(double p) const
{
  Vec s(cols_, 0.0);
  for (auto const &b : blocks_) {
    Vec const bs = b->abs_pow_col_sums_unchecked(p);
    for (std::size_t j = 0; j < cols_; ++j) { s[j] += bs[j]; }
  }
  return s;
}

Vec StackedOperator::abs_pow_row_sums_unchecked(double p) const
{
  Vec s;
  s.reserve(offsets_.back());
  for (auto const &b : blocks_) {
    Vec const bs = b->abs_pow_row_sums_unchecked(p);
    s.insert(s.end(), bs.begin(), bs.end());
  }
  return s;
}

// ScaledOperator -------------------------------------------------------------

ScaledOperator::ScaledOperator(Vec left, OperatorPtr op, Vec right)
  : left_(std::move(left)), op_(std::move(op)), right_(std::move(right))
{
  if (!op_ || left_.size() != op_->rows() || right_.size() != op_->cols()) {
    throw std::invalid_argument("ScaledOperator: scaling lengths do not match operator shape");
  }
}

void ScaledOperator::apply_into(std::span<const double> x, std::span<double> y) const
{
  Vec rx(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) { rx[j] = right_[j] * x[j]; }
  op_->apply_into(rx, y);
  for (std::size_t i = 0; i < y.size(); ++i) { y[i] *= left_[i]; }
}

void ScaledOperator::apply_adjoint_into(std::span<const double> y, std::span<double> x) const
{
  Vec ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) { ly[i] = left_[i] * y[i]; }
  op_->apply_adjoint_into(ly, x);
  for (std::size_t j = 0; j < x.size(); ++j) { x[j] *= right_[j]; }
}

Vec ScaledOperator::abs_pow_col_sums_unchecked(double) const
{
  throw std::logic_error("ScaledOperator: entrywise sums are not available");
}

Vec ScaledOperator::abs_pow_row_sums_unchecked(double) const
{
  throw std::logic_error("ScaledOperator: entrywise sums are not available");
}

// DiagonalMetric -------------------------------------------------------------

DiagonalMetric::DiagonalMetric(Vec entries)
{
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i] > 0.0) || !std::isfinite(entries[i])) {
      throw std::invalid_argument("DiagonalMetric: entry " + std::to_string(i) +
                                  " is not a finite positive number");
    }
  }
  entries_ = std::make_shared<const Vec>(std::move(entries));
}

// Free functions -------------------------------------------------------------

Vec ApplyFn::operator()(LinearOperator const &op, std::span<const double> x) const
{
  check_len("apply", op.shape(), op.cols(), x.size());
  Vec y(op.rows());
  op.apply_into(x, y);
  return y;
}

Vec apply_adjoint(LinearOperator const &op, std::span<const double> y)
{
  check_len("apply_adjoint", op.shape(), op.rows(), y.size());
  Vec x(op.cols());
  op.apply_adjoint_into(y, x);
  return x;
}

std::shared_ptr<const Grad2D> grad_2d(std::size_t n) { return std::make_shared<const Grad2D>(n); }

std::shared_ptr<const StackedOperator> stack(std::vector<OperatorPtr> ops)
{
  return std::make_shared<const StackedOperator>(std::move(ops));
}

double power_iteration(LinearOperator const &op, std::size_t max_iters, double tol, std::uint64_t seed)
{
  if (max_iters < 1) { throw std::invalid_argument("power_iteration: max_iters must be >= 1"); }
  if (!(tol > 0.0)) { throw std::invalid_argument("power_iteration: tol must be positive"); }
  std::size_t const n = op.cols();
  if (n == 0 || op.rows() == 0) { return 0.0; }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec v(n);
  for (auto &e : v) { e = uni(rng); }
  double nv = norm2(v);
  if (nv == 0.0) {
    v.assign(n, 1.0);
    nv = std::sqrt(double(n));
  }
  for (auto &e : v) { e /= nv; }

  Vec kv(op.rows());
  Vec z(n);
  double estimate = 0.0; // ‖K v‖² for the current unit v
  for (std::size_t it = 0; it < max_iters; ++it) {
    op.apply_into(v, kv);
    double const next = std::pow(norm2(kv), 2);
    op.apply_adjoint_into(kv, z);
    double const nz = norm2(z);
    bool const done = it > 0 && std::abs(next - estimate) <= tol * next;
    estimate = next;
    if (nz == 0.0 || done) { break; }
    for (std::size_t j = 0; j < n; ++j) { v[j] = z[j] / nz; }
  }
  // Re-evaluate on the final unit vector so the result is a certified lower bound.
  op.apply_into(v, kv);
  return norm2(kv);
}

Vec abs_pow_col_sums(LinearOperator const &op, double p)
{
  check_power(p);
  return op.abs_pow_col_sums_unchecked(p);
}

Vec abs_pow_row_sums(LinearOperator const &op, double p)
{
  check_power(p);
  return op.abs_pow_row_sums_unchecked(p);
}

Preconditioners build_preconditioners(std::span<const OperatorPtr> ops, double alpha,
                                      std::span<const std::size_t> group_lens, double fallback)
{
  if (!(alpha >= 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("build_preconditioners: alpha " + std::to_string(alpha) +
                                " outside [0, 2]");
  }
  if (ops.empty()) { throw std::invalid_argument("build_preconditioners: no operators given"); }
  if (!group_lens.empty() && group_lens.size() != ops.size()) {
    throw std::invalid_argument("build_preconditioners: group_lens must match the operator count");
  }
  if (!(fallback > 0.0)) { throw std::invalid_argument("build_preconditioners: fallback must be positive"); }

  std::size_t const cols = ops.front()->cols();
  Vec col_sum(cols, 0.0);
  std::vector<DiagonalMetric> sigmas;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    auto const &op = *ops[k];
    if (op.cols() != cols) {
      throw std::invalid_argument("build_preconditioners: operator " + std::to_string(k) +
                                  " has shape " + to_string(op.shape()) + ", expected " +
                                  std::to_string(cols) + " columns");
    }
    Vec const cs = op.abs_pow_col_sums_unchecked(2.0 - alpha);
    for (std::size_t j = 0; j < cols; ++j) { col_sum[j] += cs[j]; }

    Vec sigma = op.abs_pow_row_sums_unchecked(alpha);
    for (auto &s : sigma) { s = s > 0.0 ? 1.0 / s : fallback; }
    std::size_t const g = group_lens.empty() ? 0 : group_lens[k];
    if (g > 0) {
      if (sigma.size() != 2 * g) {
        throw std::invalid_argument("build_preconditioners: operator " + std::to_string(k) +
                                    " has " + std::to_string(sigma.size()) +
                                    " rows, expected twice the group length " + std::to_string(g));
      }
      for (std::size_t i = 0; i < g; ++i) {
        double const m = std::min(sigma[i], sigma[g + i]);
        sigma[i] = sigma[g + i] = m;
      }
    }
    sigmas.emplace_back(std::move(sigma));
  }
  for (auto &s : col_sum) { s = s > 0.0 ? 1.0 / s : fallback; }
  return {DiagonalMetric(std::move(col_sum)), std::move(sigmas)};
}

} // namespace pdsplit
