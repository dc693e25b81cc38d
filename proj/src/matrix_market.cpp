#include "pdsplit/linop.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdsplit {

namespace {

std::string lower(std::string s)
{
  for (auto &c : s) { c = char(std::tolower(static_cast<unsigned char>(c))); }
  return s;
}

} // namespace

void write_matrix_market(std::ostream &out, SparseMatrix const &m)
{
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << fmt::format("{} {} {}\n", m.rows(), m.cols(), m.nonzeros());
  auto const rp = m.row_ptr();
  auto const ci = m.col_idx();
  auto const v = m.values();
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      line.clear();
      fmt::format_to(std::back_inserter(line), "{} {} {:.17g}\n", i + 1, ci[k] + 1, v[k]);
      out << line;
    }
  }
}

SparseMatrix read_matrix_market(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line)) { throw std::runtime_error("MatrixMarket: empty input"); }
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw std::runtime_error("MatrixMarket: expected a 'matrix coordinate' banner, got: " + line);
  }
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double") {
    throw std::runtime_error("MatrixMarket: unsupported field '" + field + "'");
  }
  if (symmetry != "general") { throw std::runtime_error("MatrixMarket: only 'general' symmetry is supported"); }

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') { break; }
  }
  std::size_t rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz)) {
      throw std::runtime_error("MatrixMarket: malformed size line: " + line);
    }
  }

  std::vector<SparseMatrix::Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("MatrixMarket: expected " + std::to_string(nnz) + " entries, found " +
                               std::to_string(k));
    }
    char const *p = line.data();
    char const *end = p + line.size();
    std::size_t i = 0, j = 0;
    double v = 0.0;
    auto skip = [&] {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) { ++p; }
    };
    skip();
    auto r1 = std::from_chars(p, end, i);
    p = r1.ptr;
    skip();
    auto r2 = std::from_chars(p, end, j);
    p = r2.ptr;
    skip();
    auto r3 = std::from_chars(p, end, v);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r3.ec != std::errc() || i == 0 || j == 0) {
      throw std::runtime_error("MatrixMarket: malformed entry line " + std::to_string(k + 1) + ": " + line);
    }
    t.push_back({i - 1, j - 1, v});
  }
  return SparseMatrix::from_triplets({rows, cols}, std::move(t));
}

void write_matrix_market(std::string const &path, SparseMatrix const &m)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  write_matrix_market(out, m);
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

SparseMatrix read_matrix_market(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw std::runtime_error("cannot open '" + path + "' for reading"); }
  try {
    return read_matrix_market(in);
  } catch (std::exception const &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

} // namespace pdsplit
