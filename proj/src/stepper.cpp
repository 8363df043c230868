#include "dnflow/stepper.hpp"

#include <cmath>
#include <limits>

#include "dnflow/power.hpp"

namespace dnflow
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNonContractionLimit = 3;

bool ValidExponent(double e, double lower)
{
  return std::isfinite(e) && e > lower;
}

double DualNorm(const std::vector<double>& x, double h, double pd)
{
  double sum = 0.0;
  for (double v : x)
  {
    sum += pow_abs(v, pd);
  }
  return std::pow(h * sum, 1.0 / pd);
}

double Work(const GridFunction& rhs, const GridFunction& u_prev,
            const GridFunction& u_next)
{
  double sum = 0.0;
  for (int i = 0; i < rhs.size(); ++i)
  {
    sum += rhs[i] * (u_next[i] - u_prev[i]);
  }
  return rhs.grid().h() * sum;
}
}  // namespace

void ProblemSpec::validate() const
{
  if (!std::isfinite(p) || p < 2.0)
  {
    throw PreconditionError("p must satisfy p >= 2");
  }
  if (!ValidExponent(m, 1.0))
  {
    throw PreconditionError("m must satisfy m > 1");
  }
  if (!ValidExponent(sigma, 1.0))
  {
    throw PreconditionError("sigma must satisfy sigma > 1");
  }
  if (pot.kind() == ConvexPotential::Kind::Power && sigma != pot.sigma())
  {
    throw PreconditionError("sigma must equal the exponent of the power potential");
  }
  if (!ValidExponent(q, 1.0) || !ValidExponent(q1, 1.0) ||
      !ValidExponent(q2, 1.0))
  {
    throw PreconditionError("growth exponents q, q1, q2 must exceed 1");
  }
  if (fam.kind() == PerturbationFamily::Kind::Power && q != fam.q())
  {
    throw PreconditionError("q must equal the exponent of the power perturbation");
  }
  if (fam.kind() == PerturbationFamily::Kind::GradientPower &&
      q2 != fam.q2())
  {
    throw PreconditionError(
        "q2 must equal the exponent of the gradient power perturbation");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0))
  {
    throw PreconditionError("lambda must lie in [0, 1]");
  }
  if (!(f.grid() == grid))
  {
    throw PreconditionError("source f lives on a different grid");
  }
  if (!(h_t > 0.0) || !std::isfinite(h_t))
  {
    throw PreconditionError("time step h_t must be positive");
  }
  if (fp_max_iter < 1 || !(fp_tol > 0.0))
  {
    throw PreconditionError("fixed-point controls need max_iter >= 1, tol > 0");
  }
  if (solver_max_iter < 1 || !(solver_tol > 0.0))
  {
    throw PreconditionError("solver controls need max_iter >= 1, tol > 0");
  }
}

double phi1(const GridFunction& u, const ProblemSpec& spec)
{
  return m_dirichlet_energy(u, spec.m);
}

double phi2(const GridFunction& u, const ProblemSpec& spec)
{
  if (spec.pot.kind() == ConvexPotential::Kind::Zero)
  {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : u.values())
  {
    const double j = spec.pot.eval(v);
    if (!std::isfinite(j))
    {
      return kInf;
    }
    sum += j;
  }
  return u.grid().h() * sum;
}

double phi(const GridFunction& u, const ProblemSpec& spec)
{
  return phi1(u, spec) + phi2(u, spec);
}

EnergyRecord energy_record(const GridFunction& u, const ProblemSpec& spec)
{
  EnergyRecord e;
  e.phi1 = phi1(u, spec);
  e.phi2 = phi2(u, spec);
  e.phi = e.phi1 + e.phi2;
  e.lp_norm_p = lp_norm_pow(u, spec.p);
  return e;
}

GridFunction perturbation_term(const GridFunction& u, const ProblemSpec& spec)
{
  if (spec.lambda == 0.0 || spec.fam.kind() == PerturbationFamily::Kind::None)
  {
    return GridFunction(u.grid());
  }
  GridFunction g = perturbation_apply(u, spec.fam);
  g *= spec.lambda;
  return g;
}

double inclusion_residual(const GridFunction& u_prev,
                          const GridFunction& u_next,
                          const GridFunction& g_state,
                          const ProblemSpec& spec)
{
  if (!(u_prev.grid() == u_next.grid()) || !(g_state.grid() == u_next.grid()) ||
      !(spec.f.grid() == u_next.grid()))
  {
    throw PreconditionError("residual inputs live on different grids");
  }
  const GridFunction lap = m_laplacian(u_next, spec.m);
  const GridFunction g = perturbation_term(g_state, spec);
  const int n = u_next.size();
  std::vector<double> defect(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
  {
    if (!spec.pot.in_domain(u_next[i]))
    {
      return kInf;
    }
    const double d = (u_next[i] - u_prev[i]) / spec.h_t;
    const double rest = spec.f[i] - alpha_apply(d, spec.p) + lap[i] - g[i];
    defect[i] = rest - spec.pot.nearest_subgradient(u_next[i], rest);
  }
  return DualNorm(defect, u_next.grid().h(), dual_exponent(spec.p));
}

double inclusion_residual(const GridFunction& u_prev,
                          const GridFunction& u_next, const ProblemSpec& spec)
{
  const GridFunction& g_state =
      spec.mode == CouplingMode::SemiImplicit ? u_prev : u_next;
  return inclusion_residual(u_prev, u_next, g_state, spec);
}

StepResult step(const GridFunction& u_prev, const ProblemSpec& spec)
{
  spec.validate();
  if (!(u_prev.grid() == spec.grid))
  {
    throw PreconditionError("state lives on a different grid than the spec");
  }
  if (!std::isfinite(phi(u_prev, spec)))
  {
    throw DomainError("step needs phi(u_prev) finite");
  }

  GridFunction rhs = spec.f - perturbation_term(u_prev, spec);
  Subproblem sp;
  sp.u_prev = &u_prev;
  sp.rhs = &rhs;
  sp.p = spec.p;
  sp.m = spec.m;
  sp.h_t = spec.h_t;
  sp.pot = &spec.pot;
  const SubproblemOptions options{spec.solver_tol, spec.solver_max_iter};

  SubproblemResult sol = solve_subproblem(sp, u_prev, options);
  StepStats stats{sol.iterations, 1, sol.tau, sol.tol_used};

  if (spec.mode == CouplingMode::FixedPoint && spec.lambda != 0.0 &&
      spec.fam.kind() != PerturbationFamily::Kind::None)
  {
    double previous_delta = kInf;
    int growing = 0;
    bool converged = false;
    for (int k = 0; k < spec.fp_max_iter; ++k)
    {
      rhs = spec.f - perturbation_term(sol.v, spec);
      SubproblemResult next = solve_subproblem(sp, sol.v, options);
      stats.iterations += next.iterations;
      ++stats.fp_iterations;
      stats.tau = next.tau;
      stats.tol_used = std::max(stats.tol_used, next.tol_used);
      const double delta = lp_norm(next.v - sol.v, spec.p);
      sol = std::move(next);
      if (delta <= spec.fp_tol * std::max(1.0, lp_norm(sol.v, spec.p)))
      {
        converged = true;
        break;
      }
      growing = (delta >= previous_delta) ? growing + 1 : 0;
      if (growing >= kNonContractionLimit)
      {
        throw ModeFailure(
            "fixed-point coupling does not contract; try a smaller h_t",
            delta, sol.v.vector());
      }
      previous_delta = delta;
    }
    if (!converged)
    {
      throw ModeFailure(
          "fixed-point coupling did not converge; try a smaller h_t",
          previous_delta, sol.v.vector());
    }
  }

  StepResult out{sol.v, 0.0, {}, 0.0};
  out.stats = stats;
  out.work = Work(rhs, u_prev, out.u_next);
  out.residual = inclusion_residual(u_prev, out.u_next, spec);
  return out;
}

std::size_t step_count(double T, double h_t)
{
  if (!(T >= 0.0) || !std::isfinite(T))
  {
    throw PreconditionError("horizon T must be finite and nonnegative");
  }
  if (!(h_t > 0.0))
  {
    throw PreconditionError("time step h_t must be positive");
  }
  const double ratio = T / h_t;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
  {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

Trajectory integrate(const GridFunction& u0, double T, const ProblemSpec& spec)
{
  spec.validate();
  const std::size_t steps = step_count(T, spec.h_t);
  if (!(u0.grid() == spec.grid))
  {
    throw PreconditionError("initial state lives on a different grid");
  }
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.energies.reserve(steps + 1);
  traj.residuals.reserve(steps + 1);
  traj.work.reserve(steps + 1);
  traj.stats.reserve(steps + 1);

  EnergyRecord e0 = energy_record(u0, spec);
  if (!std::isfinite(e0.phi))
  {
    throw DomainError("initial state must have finite energy");
  }
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  traj.energies.push_back(e0);
  traj.residuals.push_back(0.0);
  traj.work.push_back(0.0);
  traj.stats.push_back(StepStats{});

  for (std::size_t k = 1; k <= steps; ++k)
  {
    StepResult r{GridFunction(spec.grid), 0.0, {}, 0.0};
    try
    {
      r = step(traj.states.back(), spec);
    }
    catch (const ModeFailure& e)
    {
      throw IntegrationFailure(
          "step " + std::to_string(k) + ": " + e.what(), e.residual(),
          e.best_iterate(), std::move(traj), k, true);
    }
    catch (const SolverFailure& e)
    {
      throw IntegrationFailure(
          "step " + std::to_string(k) + ": " + e.what(), e.residual(),
          e.best_iterate(), std::move(traj), k, false);
    }
    EnergyRecord e = energy_record(r.u_next, spec);
    const GridFunction rate =
        (1.0 / spec.h_t) * (r.u_next - traj.states.back());
    e.psi_step = spec.h_t * lp_norm_pow(rate, spec.p) / spec.p;
    traj.times.push_back(static_cast<double>(k) * spec.h_t);
    traj.states.push_back(std::move(r.u_next));
    traj.energies.push_back(e);
    traj.residuals.push_back(r.residual);
    traj.work.push_back(r.work);
    traj.stats.push_back(r.stats);
  }
  return traj;
}

}  // namespace dnflow
