#include "dnflow/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "dnflow/attractor.hpp"
#include "dnflow/diagnostics.hpp"
#include "dnflow/io.hpp"
#include "json.hpp"

namespace dnflow
{
namespace
{
namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kEnergyTol = 1e-8;
constexpr int kAttractionPoints = 101;

json Number(double v)
{
  if (std::isfinite(v))
  {
    return v;
  }
  return format_real(v);
}

/// Collects artifacts for one run directory; everything goes through
/// write_file_atomic.
class RunWriter
{
public:
  explicit RunWriter(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content)
  {
    write_file_atomic(dir_ / name, content);
    names_.push_back(name);
  }

  void write_json(const std::string& name, const json& j)
  {
    write(name, j.dump(2) + "\n");
  }

  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }

private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string StateHeader(const char* first, int n)
{
  std::string h = first;
  for (int i = 1; i <= n; ++i)
  {
    h += ",u_" + std::to_string(i);
  }
  return h + "\n";
}

std::string TrajectoryCsv(const Trajectory& t)
{
  std::string out = StateHeader("t", t.states.front().grid().n());
  for (std::size_t k = 0; k < t.size(); ++k)
  {
    out += format_real(t.times[k]) + "," + csv_join(t.states[k].vector()) + "\n";
  }
  return out;
}

std::string EnergyCsv(const Trajectory& t, double sigma_w)
{
  std::string out = "t,psi_step,phi1,phi2,phi,lp_norm_p,residual,work,lyapunov\n";
  for (std::size_t k = 0; k < t.size(); ++k)
  {
    const EnergyRecord& e = t.energies[k];
    out += csv_join({t.times[k], e.psi_step, e.phi1, e.phi2, e.phi, e.lp_norm_p,
                     t.residuals[k], t.work[k], e.phi + sigma_w * e.lp_norm_p}) +
           "\n";
  }
  return out;
}

std::string FinalStateCsv(const GridFunction& u)
{
  std::string out = "x,u\n";
  for (int i = 0; i < u.grid().n(); ++i)
  {
    out += csv_join({u.grid().node(i), u[i]}) + "\n";
  }
  return out;
}

json FitJson(const Trajectory& t, double sigma_w, std::optional<DissipationFit>* fit)
{
  try
  {
    const DissipationFit f = fit_dissipation(t, sigma_w);
    if (fit)
    {
      *fit = f;
    }
    json j = json::parse(to_json(f));
    j["certified"] = true;
    j["phi0"] = Number(t.energies.front().phi);
    j["lyapunov0"] = Number(t.energies.front().phi + sigma_w * t.energies.front().lp_norm_p);
    return j;
  }
  catch (const FitFailure& e)
  {
    return json{{"certified", false}, {"reason", e.what()}};
  }
}

Trajectory IntegrateInitial(const RunConfig& cfg, const ProblemSpec& spec)
{
  const GridFunction u0 = make_initial_rule(cfg).sample(spec.grid, 0);
  return integrate(u0, cfg.T, spec);
}

double TailStart(const RunConfig& cfg)
{
  return cfg.t_tail < 0.0 ? 0.75 * cfg.T : cfg.t_tail;
}

std::string BundleEnergyCsv(const Bundle& b, double sigma_w)
{
  std::string out = "index,t,phi,lp_norm_p,lyapunov\n";
  for (std::size_t i = 0; i < b.trajectories.size(); ++i)
  {
    const Trajectory& t = b.trajectories[i];
    for (std::size_t k = 0; k < t.size(); ++k)
    {
      const EnergyRecord& e = t.energies[k];
      out += std::to_string(i) + "," +
             csv_join({t.times[k], e.phi, e.lp_norm_p, e.phi + sigma_w * e.lp_norm_p}) +
             "\n";
    }
  }
  return out;
}

/// Common dissipative constants of a bundle: smallest beta and largest F
/// over the members. Null when some member cannot be certified.
json BundleFit(const Bundle& b, double sigma_w, std::vector<double>* entry)
{
  double beta = std::numeric_limits<double>::infinity();
  double F = 0.0;
  for (std::size_t i = 0; i < b.trajectories.size(); ++i)
  {
    try
    {
      const DissipationFit f = fit_dissipation(b.trajectories[i], sigma_w);
      beta = std::min(beta, f.beta);
      F = std::max(F, f.F);
    }
    catch (const FitFailure& e)
    {
      return json{{"certified", false},
                  {"reason", "trajectory " + std::to_string(i) + ": " + e.what()}};
    }
  }
  const double R = F / (sigma_w * beta) + 1.0 / sigma_w;
  *entry = absorbing_entry(b, R, sigma_w);
  json times = json::array();
  for (double t : *entry)
  {
    times.push_back(Number(t));
  }
  return json{{"certified", true}, {"beta", beta}, {"F", F}, {"R", R},
              {"sigma_w", sigma_w}, {"entry_times", times}};
}

json BundleSummary(const Bundle& b)
{
  json finals = json::array();
  for (const Trajectory& t : b.trajectories)
  {
    finals.push_back(json{{"phi", Number(t.energies.back().phi)},
                          {"lp_norm_p", Number(t.energies.back().lp_norm_p)}});
  }
  return json{{"count", b.trajectories.size()},
              {"T", b.T},
              {"initial_rule", b.rule.describe()},
              {"final", finals}};
}

struct Outcome
{
  int exit_code = kExitOk;
  std::string message;
  json summary = json::object();
};

Outcome RunIntegrate(const RunConfig& cfg, RunWriter& out)
{
  const ProblemSpec spec = make_spec(cfg);
  const Trajectory t = IntegrateInitial(cfg, spec);
  out.write("trajectory.csv", TrajectoryCsv(t));
  out.write("energy.csv", EnergyCsv(t, cfg.sigma_w));
  out.write("final_state.csv", FinalStateCsv(t.states.back()));
  out.write_json("dissipation.json", FitJson(t, cfg.sigma_w, nullptr));
  Outcome o;
  o.summary["steps"] = t.size() - 1;
  o.summary["final_phi"] = Number(t.energies.back().phi);
  double worst = 0.0;
  for (double r : t.residuals)
  {
    worst = std::max(worst, r);
  }
  o.summary["max_residual"] = Number(worst);
  return o;
}

Outcome RunDiagnose(const RunConfig& cfg, RunWriter& out)
{
  const ProblemSpec spec = make_spec(cfg);
  std::vector<ConditionReport> reports;
  reports.push_back(check_A1_A2(spec, cfg.samples, cfg.seed));
  reports.push_back(check_B1(spec, cfg.samples, cfg.eps, cfg.seed));
  reports.push_back(check_S1(spec, cfg.samples, cfg.seed));
  const ConditionReport exponents = check_exponents(spec, cfg.dimension);
  reports.push_back(exponents);

  const Trajectory t = IntegrateInitial(cfg, spec);
  out.write("energy.csv", EnergyCsv(t, cfg.sigma_w));
  out.write("final_state.csv", FinalStateCsv(t.states.back()));
  out.write_json("dissipation.json", FitJson(t, cfg.sigma_w, nullptr));
  reports.push_back(check_energy_inequality(t, kEnergyTol));
  reports.push_back(check_perturbation_bound(t, spec, cfg.eps));
  reports.push_back(check_zeta_monotone(t, spec));

  json failed = json::array();
  for (const ConditionReport& r : reports)
  {
    if (!r.holds)
    {
      failed.push_back(r.condition);
    }
  }
  json j;
  j["classification"] = exponents.classification;
  j["reports"] = json::parse(to_json(reports));
  j["failed"] = failed;
  out.write_json("conditions.json", j);

  Outcome o;
  o.summary["steps"] = t.size() - 1;
  o.summary["classification"] = exponents.classification;
  o.summary["failed_conditions"] = failed;
  if (!failed.empty())
  {
    o.exit_code = kExitCondition;
    o.message = "condition check failed: " + failed.dump();
  }
  return o;
}

Bundle RunBundleFor(const RunConfig& cfg)
{
  return run_bundle(make_initial_rule(cfg), static_cast<std::size_t>(cfg.count),
                    make_spec(cfg), cfg.T);
}

Outcome RunBundle(const RunConfig& cfg, RunWriter& out)
{
  const Bundle b = RunBundleFor(cfg);
  out.write("bundle_energy.csv", BundleEnergyCsv(b, cfg.sigma_w));
  std::vector<double> entry;
  json j = BundleSummary(b);
  j["dissipation"] = BundleFit(b, cfg.sigma_w, &entry);
  out.write_json("bundle_summary.json", j);
  Outcome o;
  o.summary["steps"] = step_count(cfg.T, cfg.h_t);
  o.summary["count"] = cfg.count;
  return o;
}

Outcome RunOmega(const RunConfig& cfg, RunWriter& out)
{
  const Bundle b = RunBundleFor(cfg);
  const OmegaSet omega = omega_limit(b, TailStart(cfg), cfg.cluster_eps);
  std::vector<double> times;
  for (int k = 0; k < kAttractionPoints; ++k)
  {
    times.push_back(cfg.T * k / (kAttractionPoints - 1));
  }
  const AttractionCurve curve = attraction_curve(b, omega, times);

  out.write("bundle_energy.csv", BundleEnergyCsv(b, cfg.sigma_w));
  std::string states = "representative,phi," +
                       StateHeader("radius", b.spec.grid.n());
  for (std::size_t r = 0; r < omega.representatives.size(); ++r)
  {
    states += std::to_string(r) + "," +
              csv_join({omega.energies[r], omega.radii[r]}) + "," +
              csv_join(omega.representatives[r].vector()) + "\n";
  }
  out.write("omega_states.csv", states);
  std::string attraction = "t,dist\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k)
  {
    attraction += csv_join({curve.times[k], curve.dist[k]}) + "\n";
  }
  out.write("attraction.csv", attraction);

  json j = BundleSummary(b);
  j["representatives"] = omega.representatives.size();
  json energies = json::array(), radii = json::array();
  for (std::size_t r = 0; r < omega.representatives.size(); ++r)
  {
    energies.push_back(Number(omega.energies[r]));
    radii.push_back(Number(omega.radii[r]));
  }
  j["energies"] = energies;
  j["radii"] = radii;
  j["members"] = omega.members;
  j["t_tail"] = omega.t_tail;
  j["t_end"] = omega.t_end;
  j["cluster_eps"] = omega.cluster_eps;
  j["states_considered"] = omega.states_considered;
  j["final_distance"] = Number(curve.dist.back());
  j["monotone_tail"] = curve.monotone_tail;
  out.write_json("omega_summary.json", j);

  Outcome o;
  o.summary["steps"] = step_count(cfg.T, cfg.h_t);
  o.summary["representatives"] = omega.representatives.size();
  return o;
}

Outcome RunSweep(const RunConfig& cfg, RunWriter& out)
{
  const ProblemSpec base = make_spec(cfg);
  const double lam1 = dirichlet_principal_eigenvalue(base.grid);
  std::vector<double> values = cfg.sweep_values;
  if (cfg.sweep_relative)
  {
    for (double& v : values)
    {
      v *= lam1;
    }
  }
  const GridFunction u0 = make_initial_rule(cfg).sample(base.grid, 0);
  const SweepReport r = lambda_sweep(base, values, u0, cfg.T, cfg.cap, cfg.sigma_w);

  std::string csv =
      "value,relative,bounded,solver_failure,max_ratio,initial_norm,terminal_norm,t_stop\n";
  for (const SweepPoint& pt : r.points)
  {
    csv += csv_join({pt.value, pt.value / lam1}) + "," + (pt.bounded ? "1" : "0") + "," +
           (pt.solver_failure ? "1" : "0") + "," +
           csv_join({pt.max_ratio, pt.initial_norm, pt.terminal_norm, pt.t_stop}) + "\n";
  }
  out.write("sweep.csv", csv);
  out.write("sweep.json", to_json(r) + "\n");

  // Blow-up is the expected outcome of part of a sweep, not a failure.
  Outcome o;
  o.summary["steps"] = step_count(cfg.T, cfg.h_t);
  o.summary["lambda1"] = lam1;
  o.summary["threshold_lo"] = Number(r.threshold_lo);
  o.summary["threshold_hi"] = Number(r.threshold_hi);
  return o;
}

json BaseSummary(const RunConfig& cfg, const std::vector<std::string>& defaults)
{
  return json{{"command", cfg.command},
              {"run_id", cfg.run_id},
              {"seed", cfg.seed},
              {"T", cfg.T},
              {"h_t", cfg.h_t},
              {"n", cfg.n},
              {"config", render_config(cfg)},
              {"defaults_applied", defaults}};
}

std::string MissingList(const std::vector<std::string>& expected)
{
  std::string s;
  for (const auto& e : expected)
  {
    s += (s.empty() ? "" : ", ") + e;
  }
  return s;
}

double JsonReal(const json& j)
{
  if (j.is_number())
  {
    return j.get<double>();
  }
  return std::stod(j.get<std::string>());
}

std::string PhiPlot(const fs::path& dir)
{
  std::ostringstream s;
  s << "set output 'phi.png'\n"
    << "set xlabel 't'\nset ylabel 'energy'\n";
  const json fit = json::parse(read_file(dir / "dissipation.json"));
  if (fit.value("certified", false))
  {
    const double beta = JsonReal(fit.at("beta"));
    const double F = JsonReal(fit.at("F"));
    const double L0 = JsonReal(fit.at("lyapunov0"));
    s << "beta = " << format_real(beta) << "\nF = " << format_real(F)
      << "\nL0 = " << format_real(L0) << "\n"
      << "bound(t) = F/beta + L0*exp(-beta*t)\n"
      << "plot 'energy.csv' using 1:5 with lines title 'phi', \\\n"
      << "     'energy.csv' using 1:9 with lines title 'lyapunov', \\\n"
      << "     bound(x) with lines dashtype 2 title 'fitted bound'\n";
  }
  else
  {
    s << "plot 'energy.csv' using 1:5 with lines title 'phi'\n";
  }
  return s.str();
}

std::string FinalPlot()
{
  return "set output 'final_state.png'\nset xlabel 'x'\nset ylabel 'u'\n"
         "plot 'final_state.csv' using 1:2 with linespoints title 'u(T)'\n";
}

std::string AttractionPlot()
{
  return "set output 'attraction.png'\nset xlabel 't'\nset ylabel 'dist'\n"
         "set logscale y\n"
         "plot 'attraction.csv' using 1:2 with lines title 'dist(T(t)B, omega)'\n"
         "unset logscale y\n";
}

std::string BundlePlot()
{
  return "set output 'bundle_phi.png'\nset xlabel 't'\nset ylabel 'lyapunov'\n"
         "set logscale y\n"
         "plot 'bundle_energy.csv' using 2:5 with dots title 'bundle'\n"
         "unset logscale y\n";
}

std::string SweepPlot(const fs::path& dir)
{
  const json r = json::parse(read_file(dir / "sweep.json"));
  const double lam1 = JsonReal(r.at("lambda1"));
  std::ostringstream s;
  s << "lambda1 = " << format_real(lam1) << "\n"
    << "set output 'sweep.png'\nset xlabel 'lambda'\nset ylabel 'terminal |u|_p'\n"
    << "set logscale y\n"
    << "set arrow from lambda1, graph 0 to lambda1, graph 1 nohead dashtype 2\n"
    << "plot 'sweep.csv' using 1:7 with linespoints title 'terminal norm'\n"
    << "unset arrow\nunset logscale y\n";
  return s.str();
}
}  // namespace

int exit_code_for(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::Parse:
      return kExitParse;
    case ErrorCode::Solver:
      return kExitSolver;
    case ErrorCode::Condition:
      return kExitCondition;
    case ErrorCode::Io:
      return kExitIo;
    default:
      return kExitOther;
  }
}

RunResult run_command(const RunConfig& cfg, const std::vector<std::string>& defaults)
{
  RunResult result;
  const fs::path dir = fs::path(cfg.directory) / cfg.run_id;
  result.run_dir = dir.string();
  try
  {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
      throw IoError("cannot create run directory '" + dir.string() + "': " + ec.message());
    }
  }
  catch (const Error& e)
  {
    result.exit_code = kExitIo;
    result.message = e.what();
    return result;
  }
  if (fs::exists(dir / "summary.json") || fs::exists(dir / "error.json"))
  {
    result.exit_code = kExitIo;
    result.message = "run directory '" + dir.string() +
                     "' already holds a run; choose a new run_id";
    return result;
  }

  RunWriter out(dir);
  json summary = BaseSummary(cfg, defaults);
  try
  {
    Outcome o;
    if (cfg.command == "integrate")
    {
      o = RunIntegrate(cfg, out);
    }
    else if (cfg.command == "diagnose")
    {
      o = RunDiagnose(cfg, out);
    }
    else if (cfg.command == "bundle")
    {
      o = RunBundle(cfg, out);
    }
    else if (cfg.command == "omega")
    {
      o = RunOmega(cfg, out);
    }
    else if (cfg.command == "sweep")
    {
      o = RunSweep(cfg, out);
    }
    else
    {
      throw PreconditionError("unknown command '" + cfg.command + "'");
    }
    for (auto& [key, value] : o.summary.items())
    {
      summary[key] = value;
    }
    emit_plot_script(dir.string());
    result.exit_code = o.exit_code;
    result.message = o.message;
    summary["exit_code"] = o.exit_code;
    summary["artifacts"] = out.names();
    summary["artifacts"].push_back("plot.gp");
    out.write_json("summary.json", summary);
    result.artifacts = out.names();
    result.artifacts.push_back("plot.gp");
    return result;
  }
  catch (const Error& e)
  {
    result.exit_code = exit_code_for(e.code());
    result.message = e.what();
    summary["error"] = e.what();
    if (const auto* f = dynamic_cast<const IntegrationFailure*>(&e))
    {
      summary["failed_step"] = f->failed_step();
      summary["residual"] = Number(f->residual());
    }
    else if (const auto* f = dynamic_cast<const BundleFailure*>(&e))
    {
      summary["failed_trajectory"] = f->index();
      summary["residual"] = Number(f->residual());
    }
  }
  catch (const std::exception& e)
  {
    result.exit_code = kExitOther;
    result.message = e.what();
    summary["error"] = e.what();
  }
  summary["exit_code"] = result.exit_code;
  summary["artifacts"] = out.names();
  try
  {
    out.write_json("error.json", summary);
  }
  catch (const Error& e)
  {
    result.message += "; " + std::string(e.what());
  }
  result.artifacts = out.names();
  return result;
}

std::string emit_plot_script(const std::string& run_dir)
{
  const fs::path dir(run_dir);
  std::vector<std::string> expected;
  std::string command;
  const bool has_energy = fs::exists(dir / "energy.csv");
  if (fs::exists(dir / "sweep.json") || fs::exists(dir / "sweep.csv"))
  {
    command = "sweep";
    expected = {"sweep.csv", "sweep.json"};
  }
  else if (fs::exists(dir / "attraction.csv") || fs::exists(dir / "omega_summary.json"))
  {
    command = "omega";
    expected = {"attraction.csv", "omega_states.csv", "omega_summary.json",
                "bundle_energy.csv"};
  }
  else if (fs::exists(dir / "bundle_energy.csv"))
  {
    command = "bundle";
    expected = {"bundle_energy.csv", "bundle_summary.json"};
  }
  else if (has_energy || fs::exists(dir / "final_state.csv"))
  {
    command = "integrate";
    expected = {"energy.csv", "final_state.csv", "dissipation.json"};
  }
  else
  {
    throw IoError("no run artifacts in '" + run_dir +
                  "'; expected one of: energy.csv, final_state.csv, dissipation.json "
                  "(integrate, diagnose); bundle_energy.csv, bundle_summary.json "
                  "(bundle); attraction.csv, omega_states.csv, omega_summary.json "
                  "(omega); sweep.csv, sweep.json (sweep)");
  }
  std::vector<std::string> missing;
  for (const auto& name : expected)
  {
    if (!fs::exists(dir / name))
    {
      missing.push_back(name);
    }
  }
  if (!missing.empty())
  {
    throw IoError("missing artifacts in '" + run_dir + "': " + MissingList(missing) +
                  " (expected " + MissingList(expected) + ")");
  }

  std::string script =
      "# gnuplot script; run from this directory: gnuplot plot.gp\n"
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set terminal pngcairo size 900,600\n";
  if (command == "integrate")
  {
    script += PhiPlot(dir) + FinalPlot();
  }
  else if (command == "bundle")
  {
    script += BundlePlot();
  }
  else if (command == "omega")
  {
    script += AttractionPlot() + BundlePlot();
  }
  else
  {
    script += SweepPlot(dir);
  }
  const fs::path path = dir / "plot.gp";
  write_file_atomic(path, script);
  return path.string();
}

}  // namespace dnflow
