#include "pdsplit/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdsplit::io {

namespace {

std::ofstream open_out(std::string const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  return out;
}

std::ifstream open_in(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw std::runtime_error("cannot open '" + path + "' for reading"); }
  return in;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream &in)
{
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignore;
      std::getline(in, ignore);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) { return tok; }
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

double parse_real(std::string_view s, std::string const &path, std::size_t line)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) { s.remove_prefix(1); }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) { s.remove_suffix(1); }
  if (s == "inf" || s == "+inf") { return std::numeric_limits<double>::infinity(); }
  if (s == "-inf") { return -std::numeric_limits<double>::infinity(); }
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

} // namespace

std::string format_real(double v)
{
  if (std::isnan(v)) { return "nan"; }
  if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
  return fmt::format("{:.17g}", v);
}

void write_pgm16(std::string const &path, std::span<const double> pixels, std::size_t width, std::size_t height)
{
  if (pixels.size() != width * height) {
    throw std::invalid_argument("write_pgm16: " + std::to_string(pixels.size()) + " pixels for a " +
                                std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  auto out = open_out(path);
  out << "P5\n" << width << " " << height << "\n65535\n";
  std::string buf(2 * pixels.size(), '\0');
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    double const v = std::isnan(pixels[i]) ? 0.0 : std::clamp(pixels[i], 0.0, 1.0);
    auto const q = static_cast<unsigned>(std::lround(v * 65535.0));
    buf[2 * i] = char((q >> 8) & 0xff);
    buf[2 * i + 1] = char(q & 0xff);
  }
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

Image read_pgm16(std::string const &path)
{
  auto in = open_in(path);
  if (pgm_token(in) != "P5") { throw std::runtime_error(path + ": not a binary PGM (P5)"); }
  Image img;
  try {
    img.width = std::stoul(pgm_token(in));
    img.height = std::stoul(pgm_token(in));
    if (std::stoul(pgm_token(in)) != 65535) { throw std::runtime_error("maxval"); }
  } catch (std::exception const &) {
    throw std::runtime_error(path + ": malformed 16-bit PGM header");
  }
  std::string buf(2 * img.width * img.height, '\0');
  in.read(buf.data(), std::streamsize(buf.size()));
  if (in.gcount() != std::streamsize(buf.size())) { throw std::runtime_error(path + ": truncated pixel data"); }
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    unsigned const q = (unsigned(static_cast<unsigned char>(buf[2 * i])) << 8) |
                       unsigned(static_cast<unsigned char>(buf[2 * i + 1]));
    img.pixels[i] = double(q) / 65535.0;
  }
  return img;
}

void write_vector_csv(std::string const &path, std::span<const double> values)
{
  auto out = open_out(path);
  std::string text;
  for (double v : values) {
    text += format_real(v);
    text += '\n';
  }
  out << text;
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

Vec read_vector_csv(std::string const &path)
{
  auto in = open_in(path);
  Vec out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) { continue; }
    out.push_back(parse_real(line, path, lineno));
  }
  return out;
}

void write_grid_csv(std::string const &path, std::span<const double> values, std::size_t rows, std::size_t cols)
{
  if (values.size() != rows * cols) {
    throw std::invalid_argument("write_grid_csv: " + std::to_string(values.size()) + " values for " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
  auto out = open_out(path);
  std::string text;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c > 0) { text += ','; }
      text += format_real(values[r * cols + c]);
    }
    text += '\n';
  }
  out << text;
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

} // namespace pdsplit::io
