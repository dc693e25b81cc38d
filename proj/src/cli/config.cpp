#include "pdsplit/cli.hpp"
#include "pdsplit/io.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pdsplit::cli {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(std::string const &path, std::string const &what, std::string const &got)
{
  throw ConfigError(path + ": " + what + ", got '" + got + "'");
}

double to_real(std::string const &path, std::string text)
{
  boost::trim(text);
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    fail(path, "expected a finite number", text);
  }
  return v;
}

std::uint64_t to_count(std::string const &path, std::string text)
{
  boost::trim(text);
  std::uint64_t v = 0;
  auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(path, "expected a nonnegative integer", text);
  }
  return v;
}

bool to_bool(std::string const &path, std::string text)
{
  boost::trim(text);
  boost::to_lower(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") { return true; }
  if (text == "false" || text == "0" || text == "no" || text == "off") { return false; }
  fail(path, "expected true or false", text);
}

std::string lowered(std::string text)
{
  boost::trim(text);
  boost::to_lower(text);
  return text;
}

Vec parse_angles(std::string const &path, std::string const &text)
{
  std::vector<std::string> parts;
  std::string const t = boost::trim_copy(text);
  if (t.find(':') != std::string::npos) {
    boost::split(parts, t, boost::is_any_of(":"));
    if (parts.size() != 3) { fail(path, "expected start:step:stop", text); }
    double const start = to_real(path, parts[0]);
    double const step = to_real(path, parts[1]);
    double const stop = to_real(path, parts[2]);
    if (step == 0.0 || (stop - start) / step < 0.0) { fail(path, "empty angle range", text); }
    return tomo::angle_range(start, step, stop);
  }
  boost::split(parts, t, boost::is_any_of(","));
  Vec out;
  for (auto const &p : parts) { out.push_back(to_real(path, p)); }
  if (out.empty()) { fail(path, "expected at least one angle", text); }
  return out;
}

std::string policy_name(PolicyKind k)
{
  switch (k) {
  case PolicyKind::Fixed: return "fixed";
  case PolicyKind::AutoFixed: return "auto-fixed";
  case PolicyKind::Preconditioned: return "preconditioned";
  }
  return "?";
}

std::string constraint_name(tomo::Constraint::Kind k)
{
  switch (k) {
  case tomo::Constraint::Kind::None: return "none";
  case tomo::Constraint::Kind::Nonneg: return "nonneg";
  case tomo::Constraint::Kind::Box: return "box";
  }
  return "?";
}

} // namespace

Vec RunConfig::angles_deg() const { return parse_angles("geometry.angles", geometry.angles); }

std::pair<std::string, std::string> parse_override(std::string const &text)
{
  auto const eq = text.find('=');
  auto const dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + text + "': expected section.key=value");
  }
  return {boost::trim_copy(text.substr(0, eq)), boost::trim_copy(text.substr(eq + 1))};
}

RunConfig config_from_tree(pt::ptree const &tree)
{
  static std::map<std::string, std::set<std::string>> const known = {
    {"geometry", {"n", "angles", "p"}},
    {"model", {"w1", "w2", "lambda", "tv", "constraint", "box_lo", "box_hi", "method"}},
    {"solver",
     {"policy", "tau", "sigma", "alpha", "theta", "epsilon", "max_iter", "log_every", "seed", "allow_max_iter"}},
    {"noise", {"gaussian_sigma", "impulse_fraction", "impulse_scale", "seed"}},
    {"io", {"out"}},
  };

  RunConfig cfg;
  for (auto const &[section, body] : tree) {
    auto const it = known.find(section);
    if (it == known.end()) { throw ConfigError(section + ": unknown section"); }
    if (!body.data().empty()) { throw ConfigError(section + ": expected a [section], not a value"); }
    for (auto const &[key, node] : body) {
      std::string const path = section + "." + key;
      if (!it->second.contains(key)) { throw ConfigError(path + ": unknown key"); }
      std::string const v = node.data();

      if (section == "geometry") {
        if (key == "n") {
          cfg.geometry.n = to_count(path, v);
          if (cfg.geometry.n < 1) { fail(path, "expected an image side of at least 1", v); }
        } else if (key == "angles") {
          parse_angles(path, v);
          cfg.geometry.angles = boost::trim_copy(v);
        } else if (key == "p") {
          cfg.geometry.p = to_count(path, v);
        }
      } else if (section == "model") {
        auto &m = cfg.model;
        if (key == "w1") {
          m.w1 = to_real(path, v);
        } else if (key == "w2") {
          m.w2 = to_real(path, v);
        } else if (key == "lambda") {
          m.lambda = to_real(path, v);
          if (!(m.lambda > 0.0)) { fail(path, "expected a positive number", v); }
        } else if (key == "tv") {
          auto const s = lowered(v);
          if (s == "atv" || s == "anisotropic") {
            m.tv = tomo::TvKind::Anisotropic;
          } else if (s == "itv" || s == "isotropic") {
            m.tv = tomo::TvKind::Isotropic;
          } else {
            fail(path, "expected atv or itv", v);
          }
        } else if (key == "constraint") {
          auto const s = lowered(v);
          if (s == "none") {
            m.constraint.kind = tomo::Constraint::Kind::None;
          } else if (s == "nonneg") {
            m.constraint.kind = tomo::Constraint::Kind::Nonneg;
          } else if (s == "box") {
            m.constraint.kind = tomo::Constraint::Kind::Box;
          } else {
            fail(path, "expected none, nonneg or box", v);
          }
        } else if (key == "box_lo") {
          m.constraint.lo = to_real(path, v);
        } else if (key == "box_hi") {
          m.constraint.hi = to_real(path, v);
        } else if (key == "method") {
          auto const s = lowered(v);
          if (s == "term" || s == "i") {
            m.method = tomo::Method::ConstraintAsTerm;
          } else if (s == "primal" || s == "ii") {
            m.method = tomo::Method::ConstraintAsPrimal;
          } else {
            fail(path, "expected term (I) or primal (II)", v);
          }
        }
      } else if (section == "solver") {
        auto &s = cfg.solver;
        if (key == "policy") {
          auto const p = lowered(v);
          if (p == "fixed") {
            s.policy = PolicyKind::Fixed;
          } else if (p == "auto-fixed" || p == "auto") {
            s.policy = PolicyKind::AutoFixed;
          } else if (p == "preconditioned") {
            s.policy = PolicyKind::Preconditioned;
          } else {
            fail(path, "expected fixed, auto-fixed or preconditioned", v);
          }
        } else if (key == "tau") {
          s.tau = to_real(path, v);
        } else if (key == "sigma") {
          s.sigma = to_real(path, v);
        } else if (key == "alpha") {
          s.alpha = to_real(path, v);
          if (!(s.alpha >= 0.0 && s.alpha <= 2.0)) { fail(path, "expected a value in [0, 2]", v); }
        } else if (key == "theta") {
          s.theta = to_real(path, v);
          if (!(s.theta >= 0.0 && s.theta <= 1.0)) { fail(path, "expected a value in [0, 1]", v); }
        } else if (key == "epsilon") {
          s.epsilon = to_real(path, v);
          if (!(s.epsilon > 0.0)) { fail(path, "expected a positive number", v); }
        } else if (key == "max_iter") {
          s.max_iter = to_count(path, v);
          if (s.max_iter < 1) { fail(path, "expected at least 1", v); }
        } else if (key == "log_every") {
          s.log_every = to_count(path, v);
          if (s.log_every < 1) { fail(path, "expected at least 1", v); }
        } else if (key == "seed") {
          s.seed = to_count(path, v);
        } else if (key == "allow_max_iter") {
          s.allow_max_iter = to_bool(path, v);
        }
      } else if (section == "noise") {
        auto &nz = cfg.noise;
        if (key == "gaussian_sigma") {
          if (lowered(v) == "auto") {
            nz.gaussian_sigma.reset();
          } else {
            nz.gaussian_sigma = to_real(path, v);
            if (*nz.gaussian_sigma < 0.0) { fail(path, "expected a nonnegative number or auto", v); }
          }
        } else if (key == "impulse_fraction") {
          nz.impulse_fraction = to_real(path, v);
          if (!(nz.impulse_fraction >= 0.0 && nz.impulse_fraction <= 1.0)) {
            fail(path, "expected a value in [0, 1]", v);
          }
        } else if (key == "impulse_scale") {
          nz.impulse_scale = to_real(path, v);
          if (nz.impulse_scale < 0.0) { fail(path, "expected a nonnegative number", v); }
        } else if (key == "seed") {
          nz.seed = to_count(path, v);
        }
      } else if (section == "io") {
        cfg.io.out = boost::trim_copy(v);
      }
    }
  }

  try {
    cfg.model.validate();
  } catch (std::invalid_argument const &e) {
    throw ConfigError(e.what()); // already prefixed with "model:"
  }
  if (cfg.solver.policy == PolicyKind::Fixed && !(cfg.solver.tau > 0.0 && cfg.solver.sigma > 0.0)) {
    throw ConfigError("solver.tau: the fixed policy needs positive solver.tau and solver.sigma");
  }
  return cfg;
}

RunConfig load_config(std::string const &path, std::vector<std::pair<std::string, std::string>> const &overrides)
{
  pt::ptree tree;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) { throw ConfigError(path + ": cannot open config file"); }
    try {
      pt::read_ini(in, tree);
    } catch (pt::ini_parser_error const &e) {
      throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
  }
  for (auto const &[key, value] : overrides) { tree.put(pt::ptree::path_type(key, '.'), value); }
  return config_from_tree(tree);
}

pt::ptree config_to_tree(RunConfig const &cfg)
{
  using io::format_real;
  pt::ptree t;
  t.put("geometry.n", cfg.geometry.n);
  t.put("geometry.angles", cfg.geometry.angles);
  t.put("geometry.p", cfg.geometry.p);

  auto const &m = cfg.model;
  t.put("model.w1", format_real(m.w1));
  t.put("model.w2", format_real(m.w2));
  t.put("model.lambda", format_real(m.lambda));
  t.put("model.tv", m.tv == tomo::TvKind::Anisotropic ? "atv" : "itv");
  t.put("model.constraint", constraint_name(m.constraint.kind));
  t.put("model.box_lo", format_real(m.constraint.lo));
  t.put("model.box_hi", format_real(m.constraint.hi));
  t.put("model.method", m.method == tomo::Method::ConstraintAsTerm ? "term" : "primal");

  auto const &s = cfg.solver;
  t.put("solver.policy", policy_name(s.policy));
  t.put("solver.tau", format_real(s.tau));
  t.put("solver.sigma", format_real(s.sigma));
  t.put("solver.alpha", format_real(s.alpha));
  t.put("solver.theta", format_real(s.theta));
  t.put("solver.epsilon", format_real(s.epsilon));
  t.put("solver.max_iter", s.max_iter);
  t.put("solver.log_every", s.log_every);
  t.put("solver.seed", s.seed);
  t.put("solver.allow_max_iter", s.allow_max_iter ? "true" : "false");

  auto const &nz = cfg.noise;
  t.put("noise.gaussian_sigma", nz.gaussian_sigma ? format_real(*nz.gaussian_sigma) : std::string("auto"));
  t.put("noise.impulse_fraction", format_real(nz.impulse_fraction));
  t.put("noise.impulse_scale", format_real(nz.impulse_scale));
  t.put("noise.seed", nz.seed);

  t.put("io.out", cfg.io.out);
  return t;
}

std::string config_echo(RunConfig const &cfg)
{
  std::ostringstream out;
  pt::write_ini(out, config_to_tree(cfg));
  return out.str();
}

} // namespace pdsplit::cli
