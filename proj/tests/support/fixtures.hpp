#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dnflow/stepper.hpp"
#include "oracles.hpp"

namespace fixture
{
inline dnflow::ProblemSpec Heat(int n, double L, double h_t)
{
  dnflow::ProblemSpec s;
  s.grid = dnflow::Grid1D(n, L);
  s.f = dnflow::GridFunction(s.grid);
  s.h_t = h_t;
  return s;
}

/// u_t - u_xx = c u, written as the linear family with kappa = c.
inline dnflow::ProblemSpec HeatPlus(int n, double L, double h_t, double c)
{
  dnflow::ProblemSpec s = Heat(n, L, h_t);
  s.fam = dnflow::PerturbationFamily::Linear(c);
  s.lambda = 1.0;
  return s;
}

/// j = r^4, g = -4r, lambda = 1 on (0, 2.5).
inline dnflow::ProblemSpec DoubleWell(int n, double h_t)
{
  dnflow::ProblemSpec s = Heat(n, 2.5, h_t);
  s.sigma = 4.0;
  s.pot = dnflow::ConvexPotential::Power(4.0, 4.0);
  s.fam = dnflow::PerturbationFamily::CubicWell(4.0);
  s.lambda = 1.0;
  return s;
}

/// Small smooth random field with a dominant first mode of random sign.
inline dnflow::GridFunction SmallField(const dnflow::Grid1D& g,
                                       std::uint64_t seed)
{
  oracle::Rng rng(seed);
  const double a1 = rng.uniform(-0.3, 0.3);
  const double a2 = rng.uniform(-0.1, 0.1);
  const double a3 = rng.uniform(-0.1, 0.1);
  const double L = g.length();
  return dnflow::GridFunction::Sample(g, [=](double x) {
    const double t = std::numbers::pi * x / L;
    return a1 * std::sin(t) + a2 * std::sin(2 * t) + a3 * std::sin(3 * t);
  });
}
}  // namespace fixture
