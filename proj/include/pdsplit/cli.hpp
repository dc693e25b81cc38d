#pragma once

#include "pdsplit/solver.hpp"
#include "pdsplit/tomo.hpp"

#include <boost/property_tree/ptree_fwd.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pdsplit::cli {

/// Thrown for malformed configuration; the message starts with the field
/// path, e.g. "solver.epsilon: expected a positive number, got 'x'".
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { Fixed, AutoFixed, Preconditioned };

struct RunConfig {
  struct {
    std::size_t n = 64;
    std::string angles = "0:10:179";
    std::size_t p = 0; // 0 = round(√2·n)
  } geometry;

  // L1-dominant fidelity: the default noise replaces 5% of the data with
  // full-scale impulses, which the quadratic term would chase.
  tomo::CtModelSpec model{0.1, 0.9, 0.8, tomo::TvKind::Anisotropic, {tomo::Constraint::Kind::Box, 0.0, 1.0},
                          tomo::Method::ConstraintAsPrimal};

  struct {
    PolicyKind policy = PolicyKind::Preconditioned;
    double tau = 0.0;
    double sigma = 0.0;
    double alpha = 1.0;
    double theta = 1.0;
    double epsilon = 1e-4;
    std::size_t max_iter = 40000;
    std::size_t log_every = 50;
    std::uint64_t seed = 0;
    bool allow_max_iter = false;
  } solver;

  struct {
    std::optional<double> gaussian_sigma; // empty = 0.01·mean|b|
    double impulse_fraction = 0.05;
    double impulse_scale = 1.0;
    std::uint64_t seed = 0;
  } noise;

  struct {
    std::string out = "out";
  } io;

  Vec angles_deg() const;
};

/// Splits "section.key=value".
std::pair<std::string, std::string> parse_override(std::string const &text);

/// Reads an INI-style file (optional, empty path = defaults only), then
/// applies `overrides` in order. Unknown sections or keys are rejected.
RunConfig load_config(std::string const &path, std::vector<std::pair<std::string, std::string>> const &overrides = {});
RunConfig config_from_tree(boost::property_tree::ptree const &tree);
boost::property_tree::ptree config_to_tree(RunConfig const &cfg);
/// Canonical text form; reading it back yields an identical RunConfig.
std::string config_echo(RunConfig const &cfg);

void cmd_phantom(std::size_t n, std::string const &out_path);

struct SimulateReport {
  Shape a_shape;
  std::size_t corrupted = 0;
  double gaussian_sigma = 0.0;
};

/// Writes A.mtx, b.csv, b_clean.csv, x_true.csv, sinogram.csv, meta.ini and
/// config.ini into `out_dir`.
SimulateReport cmd_simulate(RunConfig const &cfg, std::string const &out_dir);

struct SolveSummary {
  double final_snr_db = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  double final_relative_change = 0.0;
};

/// Solves the bundle in `bundle_dir`; writes recon.pgm, x_rec.csv,
/// history.csv, summary.txt and config.ini into `out_dir`.
SolveSummary cmd_solve(RunConfig const &cfg, std::string const &bundle_dir, std::string const &out_dir);

struct EvalResult {
  double snr_db = 0.0;
  double relative_error = 0.0;
};

/// Files ending in .pgm are read as images, anything else as CSV vectors.
EvalResult cmd_eval(std::string const &truth_path, std::string const &rec_path);
std::string format_eval(EvalResult const &r);
std::string format_summary(SolveSummary const &s, bool with_time);

} // namespace pdsplit::cli
