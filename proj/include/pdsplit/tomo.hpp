#pragma once

#include "pdsplit/linop.hpp"
#include "pdsplit/solver.hpp"

#include <array>
#include <optional>

namespace pdsplit::tomo {

/// Parallel-beam geometry on an n×n grid of unit pixels covering
/// [−n/2, n/2]². Pixel (r, c) has center (c + ½ − n/2, n/2 − r − ½), so row 0
/// is the top of the image. For angle θ the p rays are the lines through
/// t·(cos θ, sin θ) with direction (−sin θ, cos θ), t equispaced over
/// [−w/2, w/2] (endpoints included; t = 0 when p = 1) and w the detector
/// width, √2·n unless overridden.
struct Geometry {
  std::size_t n = 0;
  Vec angles_deg;
  std::size_t p = 0;
  std::optional<double> detector_width;

  double width() const;
  /// Signed offset of ray j.
  double ray_offset(std::size_t j) const;
  std::size_t rows() const { return angles_deg.size() * p; }
  void validate() const;
};

/// p = round(√2·n).
std::size_t default_ray_count(std::size_t n);
/// Inclusive range start:step:stop as in 0:10:179 (18 angles).
Vec angle_range(double start, double step, double stop);

struct ChordSegment {
  std::size_t pixel;
  double length;
};

/// Pixels crossed by the line through `origin` with direction `dir` and the
/// chord length inside each, in traversal order. `dir` need not be unit.
std::vector<ChordSegment> trace_ray(std::size_t n, std::array<double, 2> origin, std::array<double, 2> dir);

/// System matrix with one row per (angle, ray), angle-major.
SparseMatrix projection_matrix(Geometry const &g);

struct TomoProblem {
  std::shared_ptr<const SparseMatrix> a;
  Vec b;
  Vec x_true;
  Geometry geometry;
};

/// A, b = A·x_true and x_true = shepp_logan(n). Empty angles default to
/// 0:1:179 and p = 0 defaults to round(√2·n).
TomoProblem paralleltomo(std::size_t n, Vec angles_deg = {}, std::size_t p = 0,
                         std::optional<double> detector_width = std::nullopt);

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;
};

/// The ten-ellipse modified Shepp-Logan table on [−1, 1]².
std::span<const Ellipse> modified_shepp_logan();

/// Sum of intensities of the ellipses containing each pixel center (no
/// clamping), row-major, coordinates normalized to [−1, 1].
Vec render_ellipses(std::size_t n, std::span<const Ellipse> ellipses);

/// Modified Shepp-Logan phantom clamped to [0, 1].
Vec shepp_logan(std::size_t n);

struct NoiseSpec {
  double gaussian_sigma = 0.0;
  double impulse_fraction = 0.0;
  double impulse_scale = 1.0;
  std::uint64_t seed = 0;
};

struct NoisyData {
  Vec values;
  std::vector<std::size_t> corrupted;
};

/// b + σ_g·N(0, 1), then each entry independently (probability
/// impulse_fraction) replaced by a uniform draw in [0, impulse_scale·max|b|].
NoisyData add_noise_with_report(std::span<const double> b, NoiseSpec const &spec);
Vec add_noise(std::span<const double> b, NoiseSpec const &spec);

/// Noise levels used when none are configured: σ_g = 0.01·mean|b|,
/// 5% impulses at full scale.
NoiseSpec default_noise(std::span<const double> b, std::uint64_t seed = 0);

/// 10·log10(‖x_true‖² / ‖x_true − x_rec‖²); +∞ when the two agree. With
/// `literal` the factor 10 is dropped.
double snr_db(std::span<const double> x_true, std::span<const double> x_rec, bool literal = false);

enum class TvKind { Anisotropic, Isotropic };
/// Where the constraint ι_C goes: a fourth (ι_C, I) term with G = 0, or
/// G = ι_C with three terms.
enum class Method { ConstraintAsTerm, ConstraintAsPrimal };

struct Constraint {
  enum class Kind { None, Nonneg, Box } kind = Kind::None;
  double lo = 0.0;
  double hi = 1.0;
};

/// ½w1‖Ax − b‖² + w2‖Ax − b‖₁ + λ·TV(x) subject to x ∈ C.
struct CtModelSpec {
  double w1 = 0.5;
  double w2 = 0.5;
  double lambda = 1.0;
  TvKind tv = TvKind::Anisotropic;
  Constraint constraint;
  Method method = Method::ConstraintAsPrimal;

  void validate() const;
};

Problem build_ct_problem(std::shared_ptr<const SparseMatrix> a, Vec b, std::size_t n, CtModelSpec const &spec);
Problem build_ct_problem(TomoProblem const &tomo, CtModelSpec const &spec);

} // namespace pdsplit::tomo
