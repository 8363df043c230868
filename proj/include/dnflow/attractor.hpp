#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dnflow/error.hpp"
#include "dnflow/grid.hpp"
#include "dnflow/stepper.hpp"

namespace dnflow
{
/// Deterministic rule producing the i-th initial state of a bundle.
struct InitialRule
{
  enum class Kind
  {
    Zero,
    Eigen,          // amplitude * principal eigenvector
    RandomFourier,  // amplitude * smooth random field, first mode of random sign
    Given           // states[i % states.size()]
  };
  Kind kind = Kind::RandomFourier;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  std::vector<GridFunction> states;

  GridFunction sample(const Grid1D& grid, std::size_t index) const;
  std::string describe() const;
};

struct Bundle
{
  ProblemSpec spec;
  double T = 0.0;
  InitialRule rule;
  std::vector<Trajectory> trajectories;
};

/// A bundle member failed; `index` names the trajectory.
class BundleFailure : public SolverFailure
{
public:
  BundleFailure(const std::string& what, double residual, std::size_t index)
      : SolverFailure(what, residual), index_(index)
  {
  }
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// Integrates `count` trajectories concurrently. Results do not depend on the
/// thread count. threads = 0 uses the hardware concurrency.
Bundle run_bundle(const InitialRule& rule, std::size_t count,
                  const ProblemSpec& spec, double T, unsigned threads = 0);

/// phi + sigma_w |u|^p at every recorded time.
std::vector<double> lyapunov_series(const Trajectory& traj, double sigma_w);

/// First recorded time after which the Lyapunov value stays <= R through the
/// horizon; +inf if it ends above R.
double absorbing_entry(const Trajectory& traj, double R, double sigma_w);

std::vector<double> absorbing_entry(const Bundle& bundle, double R,
                                    double sigma_w);

struct OmegaSet
{
  std::vector<GridFunction> representatives;
  std::vector<double> energies;  // phi of each representative
  std::vector<double> radii;     // max d_X from representative to its members
  std::vector<std::size_t> members;
  double t_tail = 0.0;
  double t_end = 0.0;
  double cluster_eps = 0.0;
  std::size_t states_considered = 0;
};

/// Greedy clustering of tail states (t >= t_tail) under d_X, representatives
/// replaced by cluster medoids. At most `max_states_per_trajectory` evenly
/// spaced tail states per trajectory enter the clustering.
OmegaSet omega_limit(const Bundle& bundle, double t_tail, double cluster_eps,
                     std::size_t max_states_per_trajectory = 64);

/// sup_{a in A} inf_{b in B} d_X(a, b).
double hausdorff_semidist(
    const std::vector<GridFunction>& A, const std::vector<GridFunction>& B,
    const std::function<double(const GridFunction&)>& phi, double p);

struct AttractionCurve
{
  std::vector<double> times;
  std::vector<double> dist;
  /// Non-increasing over the last quartile within 1e-6.
  bool monotone_tail = false;
};

/// dist(T(t)B, omega) at the lattice times nearest the requested ones.
AttractionCurve attraction_curve(const Bundle& bundle, const OmegaSet& omega,
                                 const std::vector<double>& times);

struct SweepPoint
{
  double value = 0.0;
  bool bounded = false;
  bool solver_failure = false;
  double initial_lyapunov = 0.0;
  double max_ratio = 0.0;  // max Lyapunov value over the initial value
  double initial_norm = 0.0;
  double terminal_norm = 0.0;
  double t_stop = 0.0;  // horizon, or the time the cap was exceeded
};

struct SweepReport
{
  std::vector<SweepPoint> points;
  double cap = 0.0;
  double lambda1 = 0.0;  // discrete principal eigenvalue of the base grid
  /// Largest bounded value below the first blow-up, and that blow-up value;
  /// NaN when the sweep has no transition.
  double threshold_lo = std::numeric_limits<double>::quiet_NaN();
  double threshold_hi = std::numeric_limits<double>::quiet_NaN();
  /// Every bounded value lies below every blow-up value.
  bool monotone = true;
};

/// Sweeps the perturbation strength: each run uses base.fam with strength
/// `value` and lambda = 1, so u_t - u_xx = value * u for the linear family.
/// A run is blow-up once the Lyapunov value exceeds cap times its initial
/// value (early exit), or when a step fails.
SweepReport lambda_sweep(const ProblemSpec& base,
                         const std::vector<double>& values,
                         const GridFunction& u0, double T, double cap = 1e6,
                         double sigma_w = 1.0);

struct SemiflowReport
{
  double tolerance = 0.0;
  double restart_error = 0.0;       // max |u(t) - restarted u(t)|_p
  double shift_max_residual = 0.0;  // residuals of u(. + s)
  double concat_max_residual = 0.0; // residuals across a restart seam
  bool restart_ok = false;
  bool shift_ok = false;
  bool concat_ok = false;

  bool passed() const { return restart_ok && shift_ok && concat_ok; }
};

/// Restart, shift and concatenation checks at lattice index `s_steps`.
/// The tolerance is 10 times the largest inner tolerance actually used.
SemiflowReport semiflow_checks(const ProblemSpec& spec, const GridFunction& u0,
                               double T, std::size_t s_steps);

std::string to_json(const SweepReport& report);

}  // namespace dnflow
