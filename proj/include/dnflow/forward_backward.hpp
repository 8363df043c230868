#pragma once

#include <vector>

#include "dnflow/functionals.hpp"
#include "dnflow/grid.hpp"

namespace dnflow
{
/// One implicit step as a composite minimization over v:
///
///   h_t sum h (1/p)|(v - u_prev)/h_t|^p + phi1(v) - sum h r v  (smooth)
///   + sum h j(v)                                                (separable)
struct Subproblem
{
  const GridFunction* u_prev = nullptr;
  const GridFunction* rhs = nullptr;  // r = f - lambda g^eval
  double p = 2.0;
  double m = 2.0;
  double h_t = 1.0;
  const ConvexPotential* pot = nullptr;
};

struct SubproblemOptions
{
  double tol = 1e-10;
  int max_iter = 200000;
};

struct SubproblemResult
{
  GridFunction v;
  int iterations = 0;
  double tau = 1.0;
  /// Weighted p'-norm of the smallest element of grad(smooth) + d(separable).
  double stationarity = 0.0;
  /// Weighted p'-norm of (v_before - v)/tau for the last accepted step.
  double prox_gradient = 0.0;
  /// Absolute tolerance actually applied (tol scaled by the operator size).
  double tol_used = 0.0;
};

/// Full objective value; +inf when v leaves the domain of j.
double subproblem_objective(const Subproblem& sp, const GridFunction& v);

/// Weighted gradient of the smooth part.
GridFunction subproblem_gradient(const Subproblem& sp, const GridFunction& v);

/// Weighted p'-norm of min |grad(smooth)(v) + s| over s in the subdifferential
/// of j at v (nodewise). +inf off the domain.
double subproblem_stationarity(const Subproblem& sp, const GridFunction& v);

/// Forward-backward splitting with backtracking, started at v0 (projected
/// into the domain of j if needed). Throws SolverFailure with the best
/// iterate when max_iter is exhausted or the step size collapses.
SubproblemResult solve_subproblem(const Subproblem& sp, const GridFunction& v0,
                                  const SubproblemOptions& options = {});

}  // namespace dnflow
