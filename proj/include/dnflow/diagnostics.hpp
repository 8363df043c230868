#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnflow/grid.hpp"
#include "dnflow/stepper.hpp"

namespace dnflow
{
/// Outcome of one numerically checked condition. Fitted constants are
/// re-verified on every sample before `holds` may be true.
struct ConditionReport
{
  std::string condition;
  bool holds = false;
  std::map<std::string, double> constants;
  /// Worst normalized slack of the certified inequality (>= -1e-9 when holds).
  double margin = 0.0;
  int samples = 0;
  int discarded = 0;
  /// Exponent reports only.
  std::string classification;
  std::map<std::string, bool> checks;
  std::vector<std::string> notes;
};

/// Constants of the dissipative estimate d/dt Phi + beta Phi <= F with
/// Phi = phi + sigma_w |u|^p.
struct DissipationFit
{
  double beta = 0.0;
  double F = 0.0;
  double R = 0.0;
  double T0_coeff = 0.0;
  /// RMS deviation of the tail rates from F, relative to max(|F|, 1).
  double fit_residual = 0.0;
  double sigma_w = 1.0;

  /// log(s + 1)/beta.
  double entry_time(double s) const;
};

/// Exponents entering the classification theorems. N is the space
/// dimension used in the critical exponents (the solver itself is 1D).
struct ExponentSet
{
  double p = 2.0;
  double m = 2.0;
  double sigma = 2.0;
  double q = 2.0;
  double q1 = 2.0;
  double q2 = 2.0;
  int N = 1;
  /// Perturbation depends on the gradient (h(x, u, Du) families).
  bool gradient = false;
  /// j has a single-valued subdifferential (not an indicator).
  bool single_valued_j = true;
};

inline constexpr const char* kNoGuarantee = "no guarantee";
inline constexpr const char* kExistenceOnly = "existence only";
inline constexpr const char* kAttractorSmallLambda = "attractor for small λ";
inline constexpr const char* kAttractorAllLambda = "attractor for all λ";

/// Smooth random fields (Fourier sums with k^-1, k^-2, k^-3 decay and the
/// principal eigenvector), each scaled along the ladder 2^j, j = -3..12.
/// Returns at least `count` states, grouped by shape in ladder order.
std::vector<GridFunction> sample_states(const Grid1D& grid, int count,
                                        std::uint64_t seed);

/// Number of scales per shape in sample_states.
int sample_ladder_size();

ConditionReport check_A1_A2(const ProblemSpec& spec, int samples,
                            std::uint64_t seed = 1);

ConditionReport check_B1(const ProblemSpec& spec, int samples, double eps,
                         std::uint64_t seed = 1);

ConditionReport check_S1(const ProblemSpec& spec, int samples,
                         std::uint64_t seed = 1);

ExponentSet exponents_of(const ProblemSpec& spec, int N = 1);

ConditionReport classify_exponents(const ExponentSet& e);

ConditionReport check_exponents(const ProblemSpec& spec, int N = 1);

/// gamma_eps = 4^{p'-1} eps p / (1 - 4^{p'-1} eps); eps in (0, 4^{1-p'}).
double perturbation_gamma(double p, double eps);

ConditionReport check_perturbation_bound(const Trajectory& traj,
                                         const ProblemSpec& spec, double eps);

/// Per-step discrete energy inequality
/// psi_step + phi(u^k) <= phi(u^{k-1}) + work_k + tol.
ConditionReport check_energy_inequality(const Trajectory& traj, double tol);

/// zeta_k = phi_k - C t_k (|f|^{p'} + 1) - lambda^{p'} M2 int_0^{t_k}
/// (phi + |u|^p), trapezoidal. Without C the smallest C (M2 = 0 unless
/// given) is fitted.
ConditionReport check_zeta_monotone(const Trajectory& traj,
                                    const ProblemSpec& spec,
                                    std::optional<double> C = std::nullopt,
                                    std::optional<double> M2 = std::nullopt);

/// Throws FitFailure when no beta > 0 certifies the trajectory.
DissipationFit fit_dissipation(const Trajectory& traj, double sigma_w = 1.0);

std::string to_json(const ConditionReport& report);
std::string to_json(const DissipationFit& fit);
std::string to_json(const std::vector<ConditionReport>& reports);

}  // namespace dnflow
