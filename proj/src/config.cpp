#include "dnflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "dnflow/error.hpp"
#include "dnflow/io.hpp"
#include "dnflow/power.hpp"

namespace dnflow
{
namespace
{
const char* const kSections[] = {"problem", "grid", "time", "command", "output"};

struct Key
{
  std::string section;
  std::string name;
  bool required;
  std::function<void(RunConfig&, const std::string&, int)> set;
  std::function<std::string(const RunConfig&)> get;

  std::string path() const { return section + "." + name; }
};

std::string Trim(const std::string& s)
{
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos)
  {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double ParseReal(const std::string& text, int line, const std::string& path)
{
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+')
  {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
  {
    throw ParseError(line, path, "expected a finite number, got '" + text + "'");
  }
  return v;
}

long long ParseInteger(const std::string& text, int line, const std::string& path)
{
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
  {
    throw ParseError(line, path, "expected an integer, got '" + text + "'");
  }
  return v;
}

using RealCheck = std::function<bool(double)>;

Key Real(const std::string& section, const std::string& name, bool required,
         double RunConfig::*member, RealCheck ok, const std::string& range)
{
  Key k{section, name, required, nullptr, nullptr};
  const std::string path = section + "." + name;
  k.set = [=](RunConfig& c, const std::string& v, int line) {
    const double x = ParseReal(v, line, path);
    if (!ok(x))
    {
      throw ParseError(line, path, "out of range: " + range);
    }
    c.*member = x;
  };
  k.get = [=](const RunConfig& c) { return format_real(c.*member); };
  return k;
}

Key Integer(const std::string& section, const std::string& name, bool required,
            int RunConfig::*member, long long lo, long long hi)
{
  Key k{section, name, required, nullptr, nullptr};
  const std::string path = section + "." + name;
  k.set = [=](RunConfig& c, const std::string& v, int line) {
    const long long x = ParseInteger(v, line, path);
    if (x < lo || x > hi)
    {
      throw ParseError(line, path,
                       "out of range: " + std::to_string(lo) + " <= value <= " +
                           std::to_string(hi));
    }
    c.*member = static_cast<int>(x);
  };
  k.get = [=](const RunConfig& c) { return std::to_string(c.*member); };
  return k;
}

Key Choice(const std::string& section, const std::string& name, bool required,
           std::string RunConfig::*member, std::vector<std::string> allowed)
{
  Key k{section, name, required, nullptr, nullptr};
  const std::string path = section + "." + name;
  k.set = [=](RunConfig& c, const std::string& v, int line) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
    {
      std::string list;
      for (const auto& a : allowed)
      {
        list += (list.empty() ? "" : ", ") + a;
      }
      throw ParseError(line, path, "expected one of {" + list + "}, got '" + v + "'");
    }
    c.*member = v;
  };
  k.get = [=](const RunConfig& c) { return c.*member; };
  return k;
}

Key Name(const std::string& section, const std::string& name,
         std::string RunConfig::*member, bool path_like)
{
  Key k{section, name, false, nullptr, nullptr};
  const std::string path = section + "." + name;
  k.set = [=](RunConfig& c, const std::string& v, int line) {
    if (v.empty())
    {
      throw ParseError(line, path, "must not be empty");
    }
    for (char ch : v)
    {
      const bool plain = std::isalnum(static_cast<unsigned char>(ch)) ||
                         ch == '_' || ch == '-' || ch == '.';
      if (!plain && !(path_like && ch == '/'))
      {
        throw ParseError(line, path, "contains an unsupported character");
      }
    }
    c.*member = v;
  };
  k.get = [=](const RunConfig& c) { return c.*member; };
  return k;
}

const std::vector<Key>& Keys()
{
  static const std::vector<Key> keys = [] {
    auto gt = [](double lo) { return [lo](double x) { return x > lo; }; };
    auto any = [](double) { return true; };
    std::vector<Key> k;
    k.push_back(Real("problem", "p", true, &RunConfig::p,
                     [](double x) { return x >= 2.0; }, "p >= 2"));
    k.push_back(Real("problem", "m", true, &RunConfig::m, gt(1.0), "m > 1"));
    k.push_back(Real("problem", "sigma", false, &RunConfig::sigma, gt(1.0), "sigma > 1"));
    k.push_back(Choice("problem", "potential", true, &RunConfig::potential,
                       {"zero", "power", "indicator"}));
    k.push_back(Real("problem", "potential_scale", false, &RunConfig::potential_scale,
                     gt(0.0), "scale > 0"));
    k.push_back(Real("problem", "potential_lower", false, &RunConfig::potential_lower,
                     [](double x) { return x <= 0.0; }, "lower <= 0"));
    k.push_back(Real("problem", "potential_upper", false, &RunConfig::potential_upper,
                     [](double x) { return x >= 0.0; }, "upper >= 0"));
    k.push_back(Choice("problem", "perturbation", false, &RunConfig::perturbation,
                       {"none", "linear", "cubic_well", "modulated", "power",
                        "gradient_linear", "gradient_power"}));
    k.push_back(Real("problem", "kappa", false, &RunConfig::kappa, any, "finite"));
    k.push_back(Integer("problem", "perturbation_mode", false,
                        &RunConfig::perturbation_mode, 1, 1000));
    k.push_back(Real("problem", "q", false, &RunConfig::q, gt(1.0), "q > 1"));
    k.push_back(Real("problem", "q1", false, &RunConfig::q1, gt(1.0), "q1 > 1"));
    k.push_back(Real("problem", "q2", false, &RunConfig::q2, gt(1.0), "q2 > 1"));
    k.push_back(Real("problem", "lambda", true, &RunConfig::lambda,
                     [](double x) { return x >= 0.0 && x <= 1.0; }, "λ ∈ [0,1]"));
    k.push_back(Choice("problem", "forcing", true, &RunConfig::forcing,
                       {"zero", "constant", "sine"}));
    k.push_back(Real("problem", "forcing_value", false, &RunConfig::forcing_value,
                     any, "finite"));
    k.push_back(Integer("problem", "forcing_mode", false, &RunConfig::forcing_mode,
                        1, 1000));
    k.push_back(Integer("problem", "dimension", false, &RunConfig::dimension, 1, 64));
    k.push_back(Choice("problem", "initial", false, &RunConfig::initial,
                       {"zero", "eigen", "random_fourier"}));
    k.push_back(Real("problem", "initial_amplitude", false,
                     &RunConfig::initial_amplitude, any, "finite"));

    k.push_back(Integer("grid", "n", true, &RunConfig::n, 1, 100000));
    k.push_back(Real("grid", "length", false, &RunConfig::length, gt(0.0), "L > 0"));

    k.push_back(Real("time", "h_t", true, &RunConfig::h_t, gt(0.0), "h_t > 0"));
    k.push_back(Real("time", "T", true, &RunConfig::T, gt(0.0), "T > 0"));
    k.push_back(Choice("time", "mode", false, &RunConfig::mode,
                       {"semi_implicit", "fixed_point"}));
    k.push_back(Real("time", "solver_tol", false, &RunConfig::solver_tol, gt(0.0),
                     "solver_tol > 0"));
    k.push_back(Integer("time", "solver_max_iter", false, &RunConfig::solver_max_iter,
                        1, 1000000000));
    k.push_back(Real("time", "fp_tol", false, &RunConfig::fp_tol, gt(0.0), "fp_tol > 0"));
    k.push_back(Integer("time", "fp_max_iter", false, &RunConfig::fp_max_iter, 1,
                        1000000));

    k.push_back(Choice("command", "name", true, &RunConfig::command,
                       {"integrate", "diagnose", "bundle", "sweep", "omega"}));
    k.push_back(Integer("command", "count", false, &RunConfig::count, 1, 4096));
    k.push_back(Real("command", "t_tail", false, &RunConfig::t_tail, any, "finite"));
    k.push_back(Real("command", "cluster_eps", false, &RunConfig::cluster_eps,
                     gt(0.0), "cluster_eps > 0"));
    k.push_back(Real("command", "sigma_w", false, &RunConfig::sigma_w, gt(0.0),
                     "sigma_w > 0"));
    k.push_back(Real("command", "eps", false, &RunConfig::eps, gt(0.0), "eps > 0"));
    k.push_back(Integer("command", "samples", false, &RunConfig::samples, 16, 1000000));

    Key values{"command", "sweep_values", false, nullptr, nullptr};
    values.set = [](RunConfig& c, const std::string& v, int line) {
      std::vector<double> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ','))
      {
        out.push_back(ParseReal(Trim(item), line, "command.sweep_values"));
      }
      if (out.empty() || !std::is_sorted(out.begin(), out.end()))
      {
        throw ParseError(line, "command.sweep_values",
                         "expected a nonempty ascending list");
      }
      c.sweep_values = out;
    };
    values.get = [](const RunConfig& c) {
      std::string s;
      for (double v : c.sweep_values)
      {
        s += (s.empty() ? "" : ", ") + format_real(v);
      }
      return s;
    };
    k.push_back(values);

    Key relative{"command", "sweep_relative", false, nullptr, nullptr};
    relative.set = [](RunConfig& c, const std::string& v, int line) {
      if (v != "true" && v != "false")
      {
        throw ParseError(line, "command.sweep_relative", "expected true or false");
      }
      c.sweep_relative = v == "true";
    };
    relative.get = [](const RunConfig& c) {
      return std::string(c.sweep_relative ? "true" : "false");
    };
    k.push_back(relative);
    k.push_back(Real("command", "cap", false, &RunConfig::cap, gt(1.0), "cap > 1"));

    k.push_back(Name("output", "directory", &RunConfig::directory, true));
    k.push_back(Name("output", "run_id", &RunConfig::run_id, false));
    Key seed{"output", "seed", false, nullptr, nullptr};
    seed.set = [](RunConfig& c, const std::string& v, int line) {
      std::uint64_t x = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || ptr != v.data() + v.size())
      {
        throw ParseError(line, "output.seed", "expected an unsigned 64-bit integer");
      }
      c.seed = x;
    };
    seed.get = [](const RunConfig& c) { return std::to_string(c.seed); };
    k.push_back(seed);
    return k;
  }();
  return keys;
}

void CrossValidate(const RunConfig& c, const std::map<std::string, int>& lines)
{
  auto line_of = [&](const std::string& path) {
    const auto it = lines.find(path);
    return it == lines.end() ? 0 : it->second;
  };
  if (c.t_tail >= c.T)
  {
    throw ParseError(line_of("command.t_tail"), "command.t_tail",
                     "tail window must start before T");
  }
  const double k = std::pow(4.0, dual_exponent(c.p) - 1.0);
  if (!(c.eps * k < 1.0))
  {
    throw ParseError(line_of("command.eps"), "command.eps",
                     "out of range: eps < 4^{1-p'}");
  }
  try
  {
    make_spec(c).validate();
  }
  catch (const PreconditionError& e)
  {
    throw ParseError(0, "problem", e.what());
  }
}
}  // namespace

RunConfig parse_config(const std::string& text, std::vector<std::string>* defaults)
{
  const std::set<std::string> sections(std::begin(kSections), std::end(kSections));
  std::map<std::string, const Key*> by_path;
  for (const Key& k : Keys())
  {
    by_path[k.path()] = &k;
  }
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw))
  {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty())
    {
      continue;
    }
    if (s.front() == '[')
    {
      if (s.back() != ']')
      {
        throw ParseError(line, "", "malformed section header");
      }
      section = Trim(s.substr(1, s.size() - 2));
      if (!sections.count(section))
      {
        throw ParseError(line, section, "unknown section");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
    {
      throw ParseError(line, section, "expected key = value");
    }
    const std::string key = Trim(s.substr(0, eq));
    const std::string value = Trim(s.substr(eq + 1));
    if (section.empty())
    {
      throw ParseError(line, key, "key outside of a section");
    }
    const std::string path = section + "." + key;
    const auto it = by_path.find(path);
    if (it == by_path.end())
    {
      throw ParseError(line, path, "unknown key");
    }
    if (seen.count(path))
    {
      throw ParseError(line, path,
                       "duplicate key (first set on line " +
                           std::to_string(seen[path]) + ")");
    }
    seen[path] = line;
    it->second->set(cfg, value, line);
  }
  for (const Key& k : Keys())
  {
    if (seen.count(k.path()))
    {
      continue;
    }
    if (k.required)
    {
      throw ParseError(0, k.path(), "missing required key");
    }
    if (defaults)
    {
      defaults->push_back(k.path());
    }
  }
  CrossValidate(cfg, seen);
  return cfg;
}

RunConfig load_config(const std::string& path, std::vector<std::string>* defaults)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw IoError("cannot read config file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), defaults);
}

std::string render_config(const RunConfig& cfg)
{
  std::string out;
  std::string section;
  for (const Key& k : Keys())
  {
    if (k.section != section)
    {
      out += (section.empty() ? "" : "\n") + ("[" + k.section + "]\n");
      section = k.section;
    }
    out += k.name + " = " + k.get(cfg) + "\n";
  }
  return out;
}

ProblemSpec make_spec(const RunConfig& cfg)
{
  ProblemSpec s;
  s.p = cfg.p;
  s.m = cfg.m;
  s.sigma = cfg.sigma;
  s.q = cfg.q;
  s.q1 = cfg.q1;
  s.q2 = cfg.q2;
  s.lambda = cfg.lambda;
  if (cfg.potential == "power")
  {
    s.pot = ConvexPotential::Power(cfg.sigma, cfg.potential_scale);
  }
  else if (cfg.potential == "indicator")
  {
    s.pot = ConvexPotential::Indicator(cfg.potential_lower, cfg.potential_upper);
  }
  const std::string& fam = cfg.perturbation;
  if (fam == "linear")
  {
    s.fam = PerturbationFamily::Linear(cfg.kappa);
  }
  else if (fam == "cubic_well")
  {
    s.fam = PerturbationFamily::CubicWell(cfg.kappa);
  }
  else if (fam == "modulated")
  {
    s.fam = PerturbationFamily::Modulated(cfg.kappa, cfg.perturbation_mode);
  }
  else if (fam == "power")
  {
    s.fam = PerturbationFamily::Power(cfg.kappa, cfg.q);
  }
  else if (fam == "gradient_linear")
  {
    s.fam = PerturbationFamily::GradientLinear(cfg.kappa);
  }
  else if (fam == "gradient_power")
  {
    s.fam = PerturbationFamily::GradientPower(cfg.kappa, cfg.q2);
  }
  s.grid = Grid1D(cfg.n, cfg.length);
  const double L = cfg.length;
  if (cfg.forcing == "constant")
  {
    const double c = cfg.forcing_value;
    s.f = GridFunction::Sample(s.grid, [c](double) { return c; });
  }
  else if (cfg.forcing == "sine")
  {
    const double a = cfg.forcing_value;
    const int k = cfg.forcing_mode;
    s.f = GridFunction::Sample(s.grid, [=](double x) {
      return a * std::sin(k * std::numbers::pi * x / L);
    });
  }
  else
  {
    s.f = GridFunction(s.grid);
  }
  s.h_t = cfg.h_t;
  s.mode = cfg.mode == "fixed_point" ? CouplingMode::FixedPoint
                                     : CouplingMode::SemiImplicit;
  s.solver_tol = cfg.solver_tol;
  s.solver_max_iter = cfg.solver_max_iter;
  s.fp_tol = cfg.fp_tol;
  s.fp_max_iter = cfg.fp_max_iter;
  return s;
}

InitialRule make_initial_rule(const RunConfig& cfg)
{
  InitialRule r;
  r.amplitude = cfg.initial_amplitude;
  r.seed = cfg.seed;
  if (cfg.initial == "zero")
  {
    r.kind = InitialRule::Kind::Zero;
  }
  else if (cfg.initial == "eigen")
  {
    r.kind = InitialRule::Kind::Eigen;
  }
  else
  {
    r.kind = InitialRule::Kind::RandomFourier;
  }
  return r;
}

}  // namespace dnflow
