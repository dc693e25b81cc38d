#include "pdsplit/cli.hpp"
#include "pdsplit/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace pdsplit::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

void ensure_dir(std::string const &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) { throw std::runtime_error(dir + ": cannot create directory: " + ec.message()); }
}

std::string join(std::string const &dir, std::string const &name) { return (fs::path(dir) / name).string(); }

void write_text(std::string const &path, std::string const &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  out << text;
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

void write_ini(std::string const &path, pt::ptree const &tree)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  pt::write_ini(out, tree);
  if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

Vec read_values(std::string const &path)
{
  if (fs::path(path).extension() == ".pgm") { return io::read_pgm16(path).pixels; }
  return io::read_vector_csv(path);
}

StepPolicy make_policy(RunConfig const &cfg, Problem const &problem)
{
  auto const &s = cfg.solver;
  switch (s.policy) {
  case PolicyKind::Fixed: return FixedSteps{s.tau, s.sigma, s.theta};
  case PolicyKind::AutoFixed: {
    auto const [tau, sigma] = default_fixed_steps(problem, s.seed);
    return FixedSteps{tau, sigma, s.theta};
  }
  case PolicyKind::Preconditioned: return PreconditionedSteps{s.alpha, s.theta};
  }
  throw std::logic_error("unknown step policy");
}

} // namespace

void cmd_phantom(std::size_t n, std::string const &out_path)
{
  Vec const img = tomo::shepp_logan(n);
  io::write_pgm16(out_path, img, n, n);
}

SimulateReport cmd_simulate(RunConfig const &cfg, std::string const &out_dir)
{
  auto const tp = tomo::paralleltomo(cfg.geometry.n, cfg.angles_deg(), cfg.geometry.p);
  tomo::NoiseSpec noise = tomo::default_noise(tp.b, cfg.noise.seed);
  if (cfg.noise.gaussian_sigma) { noise.gaussian_sigma = *cfg.noise.gaussian_sigma; }
  noise.impulse_fraction = cfg.noise.impulse_fraction;
  noise.impulse_scale = cfg.noise.impulse_scale;
  auto const noisy = tomo::add_noise_with_report(tp.b, noise);

  ensure_dir(out_dir);
  write_matrix_market(join(out_dir, "A.mtx"), *tp.a);
  io::write_vector_csv(join(out_dir, "b.csv"), noisy.values);
  io::write_vector_csv(join(out_dir, "b_clean.csv"), tp.b);
  io::write_vector_csv(join(out_dir, "x_true.csv"), tp.x_true);
  io::write_grid_csv(join(out_dir, "sinogram.csv"), noisy.values, tp.geometry.angles_deg.size(), tp.geometry.p);

  pt::ptree meta;
  meta.put("geometry.n", tp.geometry.n);
  meta.put("geometry.p", tp.geometry.p);
  meta.put("geometry.angle_count", tp.geometry.angles_deg.size());
  meta.put("geometry.angles", cfg.geometry.angles);
  meta.put("geometry.detector_width", io::format_real(tp.geometry.width()));
  meta.put("geometry.rows", tp.a->rows());
  meta.put("geometry.cols", tp.a->cols());
  meta.put("noise.gaussian_sigma", io::format_real(noise.gaussian_sigma));
  meta.put("noise.impulse_fraction", io::format_real(noise.impulse_fraction));
  meta.put("noise.impulse_scale", io::format_real(noise.impulse_scale));
  meta.put("noise.seed", noise.seed);
  meta.put("noise.corrupted", noisy.corrupted.size());
  write_ini(join(out_dir, "meta.ini"), meta);
  write_text(join(out_dir, "config.ini"), config_echo(cfg));

  return {tp.a->shape(), noisy.corrupted.size(), noise.gaussian_sigma};
}

SolveSummary cmd_solve(RunConfig const &cfg, std::string const &bundle_dir, std::string const &out_dir)
{
  std::string const meta_path = join(bundle_dir, "meta.ini");
  if (!fs::exists(meta_path)) { throw std::runtime_error(meta_path + ": bundle metadata not found"); }
  pt::ptree meta;
  try {
    pt::read_ini(meta_path, meta);
  } catch (pt::ini_parser_error const &e) {
    throw std::runtime_error(meta_path + ": " + e.message());
  }
  auto const n = meta.get_optional<std::size_t>("geometry.n");
  if (!n || *n == 0) { throw std::runtime_error(meta_path + ": missing or invalid geometry.n"); }

  auto a = std::make_shared<const SparseMatrix>(read_matrix_market(join(bundle_dir, "A.mtx")));
  Vec b = io::read_vector_csv(join(bundle_dir, "b.csv"));
  Vec x_true;
  if (fs::exists(join(bundle_dir, "x_true.csv"))) {
    x_true = io::read_vector_csv(join(bundle_dir, "x_true.csv"));
    if (x_true.size() != *n * *n) {
      throw std::runtime_error(join(bundle_dir, "x_true.csv") + ": expected " + std::to_string(*n * *n) +
                               " values, got " + std::to_string(x_true.size()));
    }
  }

  Problem const problem = tomo::build_ct_problem(a, std::move(b), *n, cfg.model);
  StepPolicy const policy = make_policy(cfg, problem);

  SolveOptions opts;
  opts.log_every = cfg.solver.log_every;
  opts.seed = cfg.solver.seed;
  bool const have_truth = !x_true.empty() && std::any_of(x_true.begin(), x_true.end(), [](double v) { return v != 0.0; });
  if (have_truth) {
    opts.metric = [&x_true](std::span<const double> x) { return tomo::snr_db(x_true, x); };
  }

  auto const t0 = std::chrono::steady_clock::now();
  SolveResult const res = solve(problem, policy, StopRule{cfg.solver.epsilon, cfg.solver.max_iter}, {}, {}, opts);
  auto const t1 = std::chrono::steady_clock::now();

  ensure_dir(out_dir);
  io::write_pgm16(join(out_dir, "recon.pgm"), res.x, *n, *n);
  io::write_vector_csv(join(out_dir, "x_rec.csv"), res.x);

  std::string hist = "iter,rel_change,objective,snr_db\n";
  for (auto const &h : res.history) {
    hist += fmt::format("{},{},{},{}\n", h.iteration, io::format_real(h.relative_change),
                        io::format_real(h.objective), h.snr_db ? io::format_real(*h.snr_db) : std::string());
  }
  write_text(join(out_dir, "history.csv"), hist);

  SolveSummary s;
  s.iterations = res.iterations;
  s.converged = res.converged;
  s.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  s.final_relative_change = res.history.empty() ? 0.0 : res.history.back().relative_change;
  s.final_snr_db = have_truth ? tomo::snr_db(x_true, res.x) : std::nan("");
  // Wall time stays out of the bundle so repeated runs are byte-identical.
  write_text(join(out_dir, "summary.txt"), format_summary(s, false) + "\n");
  write_text(join(out_dir, "config.ini"), config_echo(cfg));
  return s;
}

EvalResult cmd_eval(std::string const &truth_path, std::string const &rec_path)
{
  Vec const truth = read_values(truth_path);
  Vec const rec = read_values(rec_path);
  if (truth.size() != rec.size()) {
    throw std::runtime_error("eval: " + truth_path + " has " + std::to_string(truth.size()) + " values but " +
                             rec_path + " has " + std::to_string(rec.size()));
  }
  EvalResult r;
  r.snr_db = tomo::snr_db(truth, rec);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (truth[i] - rec[i]) * (truth[i] - rec[i]);
    den += truth[i] * truth[i];
  }
  r.relative_error = std::sqrt(num / den);
  return r;
}

std::string format_eval(EvalResult const &r)
{
  return fmt::format("snr_db={} relative_error={}", io::format_real(r.snr_db), io::format_real(r.relative_error));
}

std::string format_summary(SolveSummary const &s, bool with_time)
{
  std::string line = fmt::format("snr_db={} iterations={} converged={} rel_change={}", io::format_real(s.final_snr_db),
                                 s.iterations, s.converged ? "true" : "false",
                                 io::format_real(s.final_relative_change));
  if (with_time) { line += fmt::format(" wall_seconds={:.3f}", s.wall_seconds); }
  return line;
}

} // namespace pdsplit::cli
