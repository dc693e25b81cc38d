// pdsplit: phantoms, simulated CT data and primal-dual reconstructions.
//
//   pdsplit phantom --n 256 --out phantom.pgm
//   pdsplit simulate --config run.ini --out bundle
//   pdsplit solve --config run.ini --bundle bundle --out result
//   pdsplit eval truth.csv result/x_rec.csv

#include "pdsplit/cli.hpp"
#include "pdsplit/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace pdsplit;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App *cmd, CommonOptions &o)
{
  cmd->add_option("-c,--config", o.config, "INI config file");
  cmd->add_option("-s,--set", o.sets, "override as section.key=value (repeatable, applied after the file)");
  cmd->add_option("-o,--out", o.out, "output directory (overrides io.out)");
}

cli::RunConfig resolve(CommonOptions const &o, std::vector<std::pair<std::string, std::string>> flags)
{
  std::vector<std::pair<std::string, std::string>> overrides;
  for (auto const &s : o.sets) { overrides.push_back(cli::parse_override(s)); }
  for (auto &f : flags) { overrides.push_back(std::move(f)); }
  if (!o.out.empty()) { overrides.emplace_back("io.out", o.out); }
  return cli::load_config(o.config, overrides);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Splitting primal-dual solvers for CT reconstruction"};
  app.require_subcommand(1);

  auto *phantom = app.add_subcommand("phantom", "write the modified Shepp-Logan phantom as a 16-bit PGM");
  std::size_t phantom_n = 256;
  std::string phantom_out = "phantom.pgm";
  phantom->add_option("-n,--n", phantom_n, "image side")->check(CLI::PositiveNumber);
  phantom->add_option("-o,--out", phantom_out, "output file");

  auto *simulate = app.add_subcommand("simulate", "build A, noisy data and ground truth into a bundle directory");
  CommonOptions sim_opts;
  add_common(simulate, sim_opts);
  std::optional<std::size_t> sim_n;
  std::optional<std::string> sim_angles;
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("--n", sim_n, "image side (geometry.n)");
  simulate->add_option("--angles", sim_angles, "start:step:stop or a comma list (geometry.angles)");
  simulate->add_option("--seed", sim_seed, "noise seed (noise.seed)");

  auto *solve = app.add_subcommand("solve", "reconstruct from a bundle");
  CommonOptions solve_opts;
  add_common(solve, solve_opts);
  std::string bundle;
  std::optional<std::string> policy;
  std::optional<double> epsilon;
  std::optional<std::size_t> max_iter;
  bool allow_max_iter = false;
  solve->add_option("-b,--bundle", bundle, "bundle directory written by simulate")->required();
  solve->add_option("--policy", policy, "fixed, auto-fixed or preconditioned (solver.policy)");
  solve->add_option("--epsilon", epsilon, "relative-change tolerance (solver.epsilon)");
  solve->add_option("--max-iter", max_iter, "iteration cap (solver.max_iter)");
  solve->add_flag("--allow-max-iter", allow_max_iter, "exit 0 even when the iteration cap is hit");

  auto *eval = app.add_subcommand("eval", "SNR and relative error of a reconstruction");
  std::string truth_path;
  std::string rec_path;
  eval->add_option("truth", truth_path, "reference vector (.csv) or image (.pgm)")->required();
  eval->add_option("reconstruction", rec_path, "reconstruction vector (.csv) or image (.pgm)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed()) {
      cli::cmd_phantom(phantom_n, phantom_out);
      std::cout << "wrote " << phantom_out << "\n";
      return 0;
    }
    if (simulate->parsed()) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (sim_n) { flags.emplace_back("geometry.n", std::to_string(*sim_n)); }
      if (sim_angles) { flags.emplace_back("geometry.angles", *sim_angles); }
      if (sim_seed) { flags.emplace_back("noise.seed", std::to_string(*sim_seed)); }
      auto const cfg = resolve(sim_opts, std::move(flags));
      auto const rep = cli::cmd_simulate(cfg, cfg.io.out);
      std::cout << "A " << to_string(rep.a_shape) << ", " << rep.corrupted << " impulse-corrupted entries, wrote "
                << cfg.io.out << "\n";
      return 0;
    }
    if (solve->parsed()) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (policy) { flags.emplace_back("solver.policy", *policy); }
      if (epsilon) { flags.emplace_back("solver.epsilon", io::format_real(*epsilon)); }
      if (max_iter) { flags.emplace_back("solver.max_iter", std::to_string(*max_iter)); }
      if (allow_max_iter) { flags.emplace_back("solver.allow_max_iter", "true"); }
      auto const cfg = resolve(solve_opts, std::move(flags));
      auto const s = cli::cmd_solve(cfg, bundle, cfg.io.out);
      std::cout << cli::format_summary(s, true) << "\n";
      if (!s.converged && !cfg.solver.allow_max_iter) {
        std::cerr << "pdsplit: iteration cap reached before convergence\n";
        return 2;
      }
      return 0;
    }
    if (eval->parsed()) {
      std::cout << cli::format_eval(cli::cmd_eval(truth_path, rec_path)) << "\n";
      return 0;
    }
  } catch (SolverError const &e) {
    std::cerr << "pdsplit: solver stopped at iteration " << e.iteration() << ": " << e.what() << "\n";
    return 3;
  } catch (std::exception const &e) {
    std::cerr << "pdsplit: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
