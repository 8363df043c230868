#include "dnflow/attractor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <thread>

#include "json.hpp"

namespace dnflow
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRuleModes = 6;

double Distance(const GridFunction& a, double phi_a, const GridFunction& b,
                double phi_b, double p)
{
  return lp_norm(a - b, p) + std::fabs(phi_a - phi_b);
}

struct TailState
{
  const GridFunction* u;
  double phi;
};

double SemiDist(const std::vector<TailState>& A,
                const std::vector<TailState>& B, double p)
{
  double worst = 0.0;
  for (const auto& a : A)
  {
    double nearest = kInf;
    for (const auto& b : B)
    {
      nearest = std::min(nearest, Distance(*a.u, a.phi, *b.u, b.phi, p));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

std::size_t NearestIndex(const Trajectory& traj, double t)
{
  const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
  if (it == traj.times.end())
  {
    return traj.size() - 1;
  }
  const std::size_t k = static_cast<std::size_t>(it - traj.times.begin());
  if (k > 0 && t - traj.times[k - 1] < traj.times[k] - t)
  {
    return k - 1;
  }
  return k;
}

double MaxResidual(const std::vector<GridFunction>& states,
                   const ProblemSpec& spec)
{
  double worst = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k)
  {
    worst = std::max(worst, inclusion_residual(states[k - 1], states[k], spec));
  }
  return worst;
}

double MaxTolUsed(const Trajectory& traj)
{
  double tol = 0.0;
  for (const auto& s : traj.stats)
  {
    tol = std::max(tol, s.tol_used);
  }
  return tol;
}
}  // namespace

GridFunction InitialRule::sample(const Grid1D& grid, std::size_t index) const
{
  switch (kind)
  {
    case Kind::Zero:
      return GridFunction(grid);
    case Kind::Eigen:
      return amplitude * dirichlet_principal_eigenvector(grid);
    case Kind::Given:
    {
      if (states.empty())
      {
        throw PreconditionError("given initial rule has no states");
      }
      const GridFunction& u = states[index % states.size()];
      if (!(u.grid() == grid))
      {
        throw PreconditionError("given initial state lives on a different grid");
      }
      return u;
    }
    case Kind::RandomFourier:
      break;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> a(kRuleModes);
  const double sign = unit(rng) < 0.0 ? -1.0 : 1.0;
  a[0] = sign * (0.5 + 0.25 * (unit(rng) + 1.0));
  for (int k = 1; k < kRuleModes; ++k)
  {
    a[static_cast<std::size_t>(k)] = 0.5 * unit(rng) / ((k + 1.0) * (k + 1.0));
  }
  const double L = grid.length();
  const double amp = amplitude;
  return GridFunction::Sample(grid, [&](double x) {
    double s = 0.0;
    for (int k = 0; k < kRuleModes; ++k)
    {
      s += a[static_cast<std::size_t>(k)] *
           std::sin((k + 1) * std::numbers::pi * x / L);
    }
    return amp * s;
  });
}

std::string InitialRule::describe() const
{
  switch (kind)
  {
    case Kind::Zero:
      return "zero";
    case Kind::Eigen:
      return "eigen(amplitude=" + std::to_string(amplitude) + ")";
    case Kind::RandomFourier:
      return "random_fourier(amplitude=" + std::to_string(amplitude) +
             ", seed=" + std::to_string(seed) + ")";
    case Kind::Given:
      return "given(" + std::to_string(states.size()) + " states)";
  }
  return "unknown";
}

Bundle run_bundle(const InitialRule& rule, std::size_t count,
                  const ProblemSpec& spec, double T, unsigned threads)
{
  spec.validate();
  if (count == 0)
  {
    throw PreconditionError("bundle needs at least one trajectory");
  }
  Bundle bundle;
  bundle.spec = spec;
  bundle.T = T;
  bundle.rule = rule;
  bundle.trajectories.resize(count);
  std::vector<std::exception_ptr> errors(count);

  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(count));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < count; i = next++)
    {
      try
      {
        bundle.trajectories[i] = integrate(rule.sample(spec.grid, i), T, spec);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w)
  {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool)
  {
    t.join();
  }
  for (std::size_t i = 0; i < count; ++i)
  {
    if (!errors[i])
    {
      continue;
    }
    try
    {
      std::rethrow_exception(errors[i]);
    }
    catch (const SolverFailure& e)
    {
      throw BundleFailure("trajectory " + std::to_string(i) + ": " + e.what(),
                          e.residual(), i);
    }
  }
  return bundle;
}

std::vector<double> lyapunov_series(const Trajectory& traj, double sigma_w)
{
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
  {
    out[k] = traj.energies[k].phi + sigma_w * traj.energies[k].lp_norm_p;
  }
  return out;
}

double absorbing_entry(const Trajectory& traj, double R, double sigma_w)
{
  if (traj.size() == 0)
  {
    throw PreconditionError("empty trajectory");
  }
  const std::vector<double> v = lyapunov_series(traj, sigma_w);
  std::size_t k = v.size();
  while (k > 0 && v[k - 1] <= R)
  {
    --k;
  }
  if (k == v.size())
  {
    return kInf;
  }
  return traj.times[k];
}

std::vector<double> absorbing_entry(const Bundle& bundle, double R,
                                    double sigma_w)
{
  std::vector<double> out;
  out.reserve(bundle.trajectories.size());
  for (const auto& t : bundle.trajectories)
  {
    out.push_back(absorbing_entry(t, R, sigma_w));
  }
  return out;
}

OmegaSet omega_limit(const Bundle& bundle, double t_tail, double cluster_eps,
                     std::size_t max_states_per_trajectory)
{
  if (!(cluster_eps > 0.0) || max_states_per_trajectory == 0)
  {
    throw PreconditionError("omega_limit needs cluster_eps > 0 and a state budget");
  }
  if (!(t_tail < bundle.T))
  {
    throw PreconditionError("t_tail must lie before the horizon");
  }
  const double p = bundle.spec.p;
  std::vector<TailState> tail;
  for (const auto& traj : bundle.trajectories)
  {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
      if (traj.times[k] >= t_tail)
      {
        idx.push_back(k);
      }
    }
    const std::size_t take = std::min(idx.size(), max_states_per_trajectory);
    for (std::size_t j = 0; j < take; ++j)
    {
      // Evenly spaced, always including the final state.
      const std::size_t pick =
          take == 1 ? idx.size() - 1
                    : j * (idx.size() - 1) / (take - 1);
      const std::size_t k = idx[pick];
      tail.push_back({&traj.states[k], traj.energies[k].phi});
    }
  }
  if (tail.empty())
  {
    throw PreconditionError("tail window holds no states");
  }

  auto dist = [&](const TailState& a, const TailState& b) {
    return Distance(*a.u, a.phi, *b.u, b.phi, p);
  };

  // Leader clustering.
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> leaders;
  for (std::size_t i = 0; i < tail.size(); ++i)
  {
    bool placed = false;
    for (std::size_t c = 0; c < leaders.size(); ++c)
    {
      if (dist(tail[i], tail[leaders[c]]) <= cluster_eps)
      {
        clusters[c].push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed)
    {
      leaders.push_back(i);
      clusters.push_back({i});
    }
  }

  // Medoids, largest clusters first so merges keep the dominant centre.
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t c = 0; c < order.size(); ++c)
  {
    order[c] = c;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].size() > clusters[b].size();
  });
  std::vector<std::size_t> reps;
  for (std::size_t c : order)
  {
    const auto& members = clusters[c];
    std::size_t best = members.front();
    double best_sum = kInf;
    for (std::size_t a : members)
    {
      double sum = 0.0;
      for (std::size_t b : members)
      {
        sum += dist(tail[a], tail[b]);
      }
      if (sum < best_sum)
      {
        best_sum = sum;
        best = a;
      }
    }
    bool close = false;
    for (std::size_t r : reps)
    {
      close = close || dist(tail[best], tail[r]) <= cluster_eps;
    }
    if (!close)
    {
      reps.push_back(best);
    }
  }
  // Cover any state left farther than cluster_eps from every representative.
  for (std::size_t i = 0; i < tail.size(); ++i)
  {
    bool covered = false;
    for (std::size_t r : reps)
    {
      covered = covered || dist(tail[i], tail[r]) <= cluster_eps;
    }
    if (!covered)
    {
      reps.push_back(i);
    }
  }

  OmegaSet out;
  out.t_tail = t_tail;
  out.t_end = bundle.T;
  out.cluster_eps = cluster_eps;
  out.states_considered = tail.size();
  out.radii.assign(reps.size(), 0.0);
  out.members.assign(reps.size(), 0);
  for (std::size_t i = 0; i < tail.size(); ++i)
  {
    std::size_t nearest = 0;
    double d_min = kInf;
    for (std::size_t r = 0; r < reps.size(); ++r)
    {
      const double d = dist(tail[i], tail[reps[r]]);
      if (d < d_min)
      {
        d_min = d;
        nearest = r;
      }
    }
    out.radii[nearest] = std::max(out.radii[nearest], d_min);
    ++out.members[nearest];
  }
  for (std::size_t r : reps)
  {
    out.representatives.push_back(*tail[r].u);
    out.energies.push_back(tail[r].phi);
  }
  return out;
}

double hausdorff_semidist(
    const std::vector<GridFunction>& A, const std::vector<GridFunction>& B,
    const std::function<double(const GridFunction&)>& phi, double p)
{
  if (A.empty() || B.empty())
  {
    throw PreconditionError("semidistance needs nonempty sets");
  }
  auto energies = [&](const std::vector<GridFunction>& S) {
    std::vector<TailState> out;
    for (const auto& u : S)
    {
      const double e = phi(u);
      if (!std::isfinite(e))
      {
        throw DomainError("semidistance needs states with finite energy");
      }
      out.push_back({&u, e});
    }
    return out;
  };
  return SemiDist(energies(A), energies(B), p);
}

AttractionCurve attraction_curve(const Bundle& bundle, const OmegaSet& omega,
                                 const std::vector<double>& times)
{
  if (omega.representatives.empty() || bundle.trajectories.empty())
  {
    throw PreconditionError("attraction curve needs a bundle and an omega set");
  }
  std::vector<TailState> target;
  for (std::size_t r = 0; r < omega.representatives.size(); ++r)
  {
    target.push_back({&omega.representatives[r], omega.energies[r]});
  }
  AttractionCurve curve;
  for (double t : times)
  {
    std::vector<TailState> slice;
    double lattice_t = t;
    for (const auto& traj : bundle.trajectories)
    {
      const std::size_t k = NearestIndex(traj, t);
      slice.push_back({&traj.states[k], traj.energies[k].phi});
      lattice_t = traj.times[k];
    }
    curve.times.push_back(lattice_t);
    curve.dist.push_back(SemiDist(slice, target, bundle.spec.p));
  }
  curve.monotone_tail = true;
  const std::size_t n = curve.dist.size();
  for (std::size_t k = n - n / 4; k < n; ++k)
  {
    if (k > 0 && curve.dist[k] > curve.dist[k - 1] + 1e-6)
    {
      curve.monotone_tail = false;
    }
  }
  return curve;
}

SweepReport lambda_sweep(const ProblemSpec& base,
                         const std::vector<double>& values,
                         const GridFunction& u0, double T, double cap,
                         double sigma_w)
{
  if (base.fam.kind() == PerturbationFamily::Kind::None)
  {
    throw PreconditionError("sweep needs a perturbation family");
  }
  if (!std::is_sorted(values.begin(), values.end()) || values.empty())
  {
    throw PreconditionError("sweep values must be nonempty and sorted");
  }
  if (!(cap > 1.0) || !(sigma_w > 0.0))
  {
    throw PreconditionError("sweep needs cap > 1 and sigma_w > 0");
  }
  SweepReport report;
  report.cap = cap;
  report.lambda1 = dirichlet_principal_eigenvalue(base.grid);
  const std::size_t steps = step_count(T, base.h_t);
  for (double value : values)
  {
    ProblemSpec spec = base;
    spec.fam = base.fam.with_strength(value);
    spec.lambda = 1.0;
    spec.validate();
    SweepPoint pt;
    pt.value = value;
    const EnergyRecord e0 = energy_record(u0, spec);
    pt.initial_lyapunov = e0.phi + sigma_w * e0.lp_norm_p;
    pt.initial_norm = lp_norm(u0, spec.p);
    if (!(pt.initial_lyapunov > 0.0) || !std::isfinite(pt.initial_lyapunov))
    {
      throw PreconditionError("sweep needs a nonzero initial state of finite energy");
    }
    GridFunction u = u0;
    pt.bounded = true;
    pt.max_ratio = 1.0;
    pt.t_stop = steps * spec.h_t;
    for (std::size_t k = 1; k <= steps; ++k)
    {
      try
      {
        u = step(u, spec).u_next;
      }
      catch (const SolverFailure&)
      {
        pt.bounded = false;
        pt.solver_failure = true;
        pt.t_stop = k * spec.h_t;
        break;
      }
      const EnergyRecord e = energy_record(u, spec);
      const double ratio = (e.phi + sigma_w * e.lp_norm_p) / pt.initial_lyapunov;
      pt.max_ratio = std::max(pt.max_ratio, ratio);
      if (!(ratio <= cap))
      {
        pt.bounded = false;
        pt.t_stop = k * spec.h_t;
        break;
      }
    }
    pt.terminal_norm = lp_norm(u, spec.p);
    report.points.push_back(pt);
  }
  for (std::size_t i = 0; i < report.points.size(); ++i)
  {
    if (!report.points[i].bounded)
    {
      report.threshold_hi = report.points[i].value;
      if (i > 0)
      {
        report.threshold_lo = report.points[i - 1].value;
      }
      for (std::size_t j = i + 1; j < report.points.size(); ++j)
      {
        report.monotone = report.monotone && !report.points[j].bounded;
      }
      break;
    }
  }
  return report;
}

SemiflowReport semiflow_checks(const ProblemSpec& spec, const GridFunction& u0,
                               double T, std::size_t s_steps)
{
  spec.validate();
  const Trajectory full = integrate(u0, T, spec);
  const std::size_t K = full.size() - 1;
  if (s_steps == 0 || s_steps >= K)
  {
    throw PreconditionError("restart index must lie strictly inside the run");
  }
  const double rest = static_cast<double>(K - s_steps) * spec.h_t;
  const Trajectory restarted = integrate(full.states[s_steps], rest, spec);
  const Trajectory head =
      integrate(u0, static_cast<double>(s_steps) * spec.h_t, spec);
  const Trajectory tail = integrate(head.states.back(), rest, spec);

  SemiflowReport r;
  r.tolerance = 10.0 * std::max({spec.solver_tol, MaxTolUsed(full),
                                 MaxTolUsed(head), MaxTolUsed(tail)});
  for (std::size_t j = 0; j < restarted.size(); ++j)
  {
    r.restart_error = std::max(
        r.restart_error,
        lp_norm(restarted.states[j] - full.states[s_steps + j], spec.p));
  }
  const std::vector<GridFunction> shifted(full.states.begin() +
                                              static_cast<std::ptrdiff_t>(s_steps),
                                          full.states.end());
  r.shift_max_residual = MaxResidual(shifted, spec);
  std::vector<GridFunction> joined = head.states;
  joined.insert(joined.end(), tail.states.begin() + 1, tail.states.end());
  r.concat_max_residual = MaxResidual(joined, spec);
  r.restart_ok = restarted.size() == K - s_steps + 1 &&
                 r.restart_error <= r.tolerance;
  r.shift_ok = r.shift_max_residual <= r.tolerance;
  r.concat_ok = joined.size() == K + 1 && r.concat_max_residual <= r.tolerance;
  return r;
}

std::string to_json(const SweepReport& report)
{
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v))
    {
      return nullptr;
    }
    return v;
  };
  nlohmann::json j;
  j["cap"] = report.cap;
  j["lambda1"] = report.lambda1;
  j["threshold_lo"] = num(report.threshold_lo);
  j["threshold_hi"] = num(report.threshold_hi);
  j["monotone"] = report.monotone;
  j["points"] = nlohmann::json::array();
  for (const auto& pt : report.points)
  {
    j["points"].push_back({{"value", pt.value},
                           {"bounded", pt.bounded},
                           {"solver_failure", pt.solver_failure},
                           {"initial_lyapunov", pt.initial_lyapunov},
                           {"max_ratio", pt.max_ratio},
                           {"initial_norm", pt.initial_norm},
                           {"terminal_norm", pt.terminal_norm},
                           {"t_stop", pt.t_stop}});
  }
  return j.dump(2);
}

}  // namespace dnflow
