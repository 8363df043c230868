#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dnflow/error.hpp"
#include "dnflow/forward_backward.hpp"
#include "dnflow/functionals.hpp"
#include "dnflow/grid.hpp"

namespace dnflow
{
enum class CouplingMode
{
  SemiImplicit,  // perturbation frozen at u_prev
  FixedPoint     // perturbation iterated to self-consistency at u_next
};

/// Everything that defines the discrete problem and its time stepping.
struct ProblemSpec
{
  double p = 2.0;
  double m = 2.0;
  /// Growth exponent of j declared for the exponent hypotheses; must equal
  /// pot.sigma() for a power potential.
  double sigma = 2.0;
  double q = 2.0;
  double q1 = 2.0;
  double q2 = 2.0;
  double lambda = 0.0;
  ConvexPotential pot = ConvexPotential::Zero();
  PerturbationFamily fam = PerturbationFamily::None();
  Grid1D grid{1, 1.0};
  GridFunction f{grid};
  double h_t = 1e-2;
  CouplingMode mode = CouplingMode::SemiImplicit;
  int fp_max_iter = 100;
  double fp_tol = 1e-12;
  double solver_tol = 1e-10;
  int solver_max_iter = 200000;

  /// Throws PreconditionError on any out-of-range field.
  void validate() const;
};

/// Energies recorded at one time level.
struct EnergyRecord
{
  double psi_step = 0.0;  // h_t * psi((u^k - u^{k-1})/h_t); 0 at k = 0
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi = 0.0;
  double lp_norm_p = 0.0;  // |u|_V^p
};

struct StepStats
{
  int iterations = 0;     // inner forward-backward iterations, summed
  int fp_iterations = 0;  // outer coupling iterations (1 when semi-implicit)
  double tau = 0.0;       // last accepted step size
  double tol_used = 0.0;  // inner tolerance after the round-off floor
};

struct StepResult
{
  GridFunction u_next;
  double residual = 0.0;
  StepStats stats;
  /// sum h (f - lambda g^eval)(u_next - u_prev).
  double work = 0.0;
};

struct Trajectory
{
  std::vector<double> times;
  std::vector<GridFunction> states;
  std::vector<EnergyRecord> energies;
  std::vector<double> residuals;  // 0 at k = 0
  std::vector<double> work;       // 0 at k = 0
  std::vector<StepStats> stats;

  std::size_t size() const noexcept { return states.size(); }
};

/// A step failed during integrate; carries everything computed before it.
class IntegrationFailure : public SolverFailure
{
public:
  IntegrationFailure(const std::string& what, double residual,
                     std::vector<double> best_iterate, Trajectory partial,
                     std::size_t failed_step, bool mode_failure)
      : SolverFailure(what, residual, std::move(best_iterate)),
        partial_(std::move(partial)),
        failed_step_(failed_step),
        mode_failure_(mode_failure)
  {
  }

  const Trajectory& partial() const noexcept { return partial_; }
  std::size_t failed_step() const noexcept { return failed_step_; }
  bool mode_failure() const noexcept { return mode_failure_; }

private:
  Trajectory partial_;
  std::size_t failed_step_;
  bool mode_failure_;
};

double phi1(const GridFunction& u, const ProblemSpec& spec);

/// sum h j(u_i); +inf when some node leaves the domain of j.
double phi2(const GridFunction& u, const ProblemSpec& spec);

/// phi1 + phi2.
double phi(const GridFunction& u, const ProblemSpec& spec);

EnergyRecord energy_record(const GridFunction& u, const ProblemSpec& spec);

/// lambda * g(u) (or lambda * h(u, Du)), nodewise.
GridFunction perturbation_term(const GridFunction& u, const ProblemSpec& spec);

/// Weighted p'-norm of f - alpha((u_next - u_prev)/h_t) + Delta_m u_next
/// - lambda g - s, with s the element of dj(u_next) closest to the rest of the
/// defect. g is evaluated at u_prev (semi-implicit) or u_next (fixed point).
/// +inf when u_next leaves the domain of j.
double inclusion_residual(const GridFunction& u_prev,
                          const GridFunction& u_next, const ProblemSpec& spec);

/// Same defect with g evaluated at an explicitly supplied state.
double inclusion_residual(const GridFunction& u_prev,
                          const GridFunction& u_next,
                          const GridFunction& g_state,
                          const ProblemSpec& spec);

/// One minimizing-movement step from u_prev.
StepResult step(const GridFunction& u_prev, const ProblemSpec& spec);

/// ceil(T/h_t) steps from u0. Throws IntegrationFailure on a failed step.
Trajectory integrate(const GridFunction& u0, double T,
                     const ProblemSpec& spec);

/// Number of steps integrate takes for horizon T.
std::size_t step_count(double T, double h_t);

}  // namespace dnflow
