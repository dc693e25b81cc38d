#pragma once

#include "pdsplit/linop.hpp"

#include <string>

namespace pdsplit::io {

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  Vec pixels; // row-major, values in [0, 1]
};

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). Values are
/// mapped linearly from [0, 1] to [0, 65535] with rounding; out-of-range
/// values are clamped.
void write_pgm16(std::string const &path, std::span<const double> pixels, std::size_t width, std::size_t height);
Image read_pgm16(std::string const &path);

/// One value per line, 17 significant digits.
void write_vector_csv(std::string const &path, std::span<const double> values);
Vec read_vector_csv(std::string const &path);

/// `rows` lines of `cols` comma-separated values, 17 significant digits.
void write_grid_csv(std::string const &path, std::span<const double> values, std::size_t rows, std::size_t cols);

/// `v` printed with 17 significant digits, which round-trips exactly; "inf",
/// "-inf" and "nan" for non-finite values.
std::string format_real(double v);

} // namespace pdsplit::io
