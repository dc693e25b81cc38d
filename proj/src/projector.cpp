#include "pdsplit/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pdsplit::tomo {

namespace {

// Segments shorter than this are grid-corner artifacts.
constexpr double kMinChord = 1e-10;

// sin/cos in degrees, exact at multiples of 90 and odd under θ → θ + 180.
std::array<double, 2> sincosd(double deg)
{
  double const q = std::round(deg / 90.0);
  double const r = (deg - 90.0 * q) * std::numbers::pi / 180.0;
  double const s = std::sin(r);
  double const c = std::cos(r);
  long const quadrant = ((long(q) % 4) + 4) % 4;
  switch (quadrant) {
  case 0: return {s, c};
  case 1: return {c, -s};
  case 2: return {-s, -c};
  default: return {-c, s};
  }
}

// Parameter interval of the line inside the open slab (−h, h) along one axis.
bool clip_axis(double o, double d, double h, double &t0, double &t1)
{
  if (d == 0.0) { return o > -h && o < h; }
  double a = (-h - o) / d;
  double b = (h - o) / d;
  if (a > b) { std::swap(a, b); }
  t0 = std::max(t0, a);
  t1 = std::min(t1, b);
  return true;
}

} // namespace

double Geometry::width() const { return detector_width.value_or(std::numbers::sqrt2 * double(n)); }

double Geometry::ray_offset(std::size_t j) const
{
  if (p <= 1) { return 0.0; }
  // Integer numerator keeps offsets j and p−1−j exact negatives of each other.
  double const num = 2.0 * double(j) - double(p - 1);
  return width() * num / (2.0 * double(p - 1));
}

void Geometry::validate() const
{
  if (n < 1) { throw std::invalid_argument("Geometry: n must be at least 1"); }
  if (angles_deg.empty()) { throw std::invalid_argument("Geometry: at least one angle is required"); }
  if (p < 1) { throw std::invalid_argument("Geometry: p must be at least 1"); }
  if (detector_width && !(*detector_width > 0.0)) {
    throw std::invalid_argument("Geometry: detector width must be positive");
  }
  for (double a : angles_deg) {
    if (!std::isfinite(a)) { throw std::invalid_argument("Geometry: non-finite angle"); }
  }
}

std::size_t default_ray_count(std::size_t n) { return std::size_t(std::llround(std::numbers::sqrt2 * double(n))); }

Vec angle_range(double start, double step, double stop)
{
  if (!(step != 0.0) || !std::isfinite(step) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw std::invalid_argument("angle range: step must be finite and nonzero");
  }
  Vec out;
  double const count = std::floor((stop - start) / step + 1e-9);
  for (long k = 0; k <= long(count); ++k) { out.push_back(start + double(k) * step); }
  return out;
}

std::vector<ChordSegment> trace_ray(std::size_t n, std::array<double, 2> origin, std::array<double, 2> dir)
{
  double const speed = std::hypot(dir[0], dir[1]);
  if (!(speed > 0.0)) { throw std::invalid_argument("trace_ray: zero direction"); }
  double const h = 0.5 * double(n);
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  if (!clip_axis(origin[0], dir[0], h, t0, t1) || !clip_axis(origin[1], dir[1], h, t0, t1) || !(t1 > t0)) {
    return {};
  }

  // Parameters where the line crosses interior grid lines, merged in order.
  std::vector<double> ts{t0, t1};
  ts.reserve(2 * n + 2);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    if (dir[axis] == 0.0) { continue; }
    for (std::size_t i = 1; i < n; ++i) {
      double const t = (-h + double(i) - origin[axis]) / dir[axis];
      if (t > t0 && t < t1) { ts.push_back(t); }
    }
  }
  std::sort(ts.begin(), ts.end());

  std::vector<ChordSegment> segs;
  segs.reserve(ts.size());
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    double const len = (ts[k + 1] - ts[k]) * speed;
    if (len <= kMinChord) { continue; }
    double const tm = 0.5 * (ts[k] + ts[k + 1]);
    double const x = origin[0] + tm * dir[0];
    double const y = origin[1] + tm * dir[1];
    auto const col = std::size_t(std::clamp(std::floor(x + h), 0.0, double(n - 1)));
    auto const row = std::size_t(std::clamp(std::floor(h - y), 0.0, double(n - 1)));
    segs.push_back({row * n + col, len});
  }
  return segs;
}

SparseMatrix projection_matrix(Geometry const &g)
{
  g.validate();
  std::size_t const n = g.n;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> cols;
  Vec vals;
  row_ptr.reserve(g.rows() + 1);
  std::vector<ChordSegment> segs;
  for (double angle : g.angles_deg) {
    auto const [s, c] = sincosd(angle);
    for (std::size_t j = 0; j < g.p; ++j) {
      double const t = g.ray_offset(j);
      segs = trace_ray(n, {t * c, t * s}, {-s, c});
      std::sort(segs.begin(), segs.end(),
                [](ChordSegment const &a, ChordSegment const &b) { return a.pixel < b.pixel; });
      for (std::size_t k = 0; k < segs.size(); ++k) {
        if (k > 0 && segs[k].pixel == segs[k - 1].pixel) {
          vals.back() += segs[k].length;
          continue;
        }
        cols.push_back(segs[k].pixel);
        vals.push_back(segs[k].length);
      }
      row_ptr.push_back(cols.size());
    }
  }
  return SparseMatrix::from_csr({g.rows(), n * n}, std::move(row_ptr), std::move(cols), std::move(vals));
}

TomoProblem paralleltomo(std::size_t n, Vec angles_deg, std::size_t p, std::optional<double> detector_width)
{
  if (angles_deg.empty()) { angles_deg = angle_range(0.0, 1.0, 179.0); }
  if (p == 0) { p = default_ray_count(n); }
  TomoProblem out;
  out.geometry = Geometry{n, std::move(angles_deg), p, detector_width};
  out.a = std::make_shared<const SparseMatrix>(projection_matrix(out.geometry));
  out.x_true = shepp_logan(n);
  out.b = apply(*out.a, out.x_true);
  return out;
}

} // namespace pdsplit::tomo
