#pragma once

#include <cmath>

namespace dnflow
{
/// |x|^e with exact multiplications for the small integer exponents that
/// dominate the hot loops.
inline double pow_abs(double x, double e)
{
  const double a = std::fabs(x);
  if (e == 2.0)
  {
    return a * a;
  }
  if (e == 1.0)
  {
    return a;
  }
  if (e == 3.0)
  {
    return a * a * a;
  }
  if (e == 4.0)
  {
    const double a2 = a * a;
    return a2 * a2;
  }
  if (a == 0.0)
  {
    return 0.0;
  }
  return std::pow(a, e);
}

/// |r|^{p-2} r, the duality map of the L^p norm to the power p.
inline double alpha_apply(double r, double p)
{
  if (p == 2.0)
  {
    return r;
  }
  if (p == 3.0)
  {
    return std::fabs(r) * r;
  }
  if (p == 4.0)
  {
    return r * r * r;
  }
  if (r == 0.0)
  {
    return 0.0;
  }
  return std::pow(std::fabs(r), p - 2.0) * r;
}

/// Hölder conjugate p/(p-1).
inline double dual_exponent(double p) { return p / (p - 1.0); }

}  // namespace dnflow
