#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle
{
/// Minimizer of (r - x)^2/(2 tau) + j(r) by a dense scan of [lo, hi] followed
/// by `refinements` zoomed rescans around the best candidate.
inline double brute_force_prox(double x, double tau,
                               const std::function<double(double)>& j,
                               double lo, double hi, int candidates = 1000000,
                               int refinements = 2, int refine_candidates = 10000)
{
  auto objective = [&](double r) {
    const double d = r - x;
    return d * d / (2.0 * tau) + j(r);
  };
  double best = lo;
  double width = hi - lo;
  int count = candidates;
  for (int pass = 0; pass <= refinements; ++pass)
  {
    const double step = width / (count - 1);
    double best_value = std::numeric_limits<double>::infinity();
    double best_r = lo;
    for (int k = 0; k < count; ++k)
    {
      const double r = lo + k * step;
      const double v = objective(r);
      if (v < best_value)
      {
        best_value = v;
        best_r = r;
      }
    }
    best = best_r;
    lo = best - 2.0 * step;
    hi = best + 2.0 * step;
    width = hi - lo;
    count = refine_candidates;
  }
  return best;
}

/// Central-difference partial derivatives of f at u.
inline std::vector<double> central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> u, double step)
{
  std::vector<double> out(u.size());
  for (size_t i = 0; i < u.size(); ++i)
  {
    const double saved = u[i];
    const double hstep = step * std::max(1.0, std::fabs(saved));
    u[i] = saved + hstep;
    const double fp = f(u);
    u[i] = saved - hstep;
    const double fm = f(u);
    u[i] = saved;
    out[i] = (fp - fm) / (2.0 * hstep);
  }
  return out;
}

/// Solves a tridiagonal system: sub[i] x[i-1] + diag[i] x[i] + super[i] x[i+1]
/// = rhs[i] (sub[0], super[n-1] ignored).
inline std::vector<double> thomas(std::vector<double> sub,
                                  std::vector<double> diag,
                                  std::vector<double> super,
                                  std::vector<double> rhs)
{
  const size_t n = diag.size();
  for (size_t i = 1; i < n; ++i)
  {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * super[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (size_t i = n - 1; i-- > 0;)
  {
    x[i] = (rhs[i] - super[i] * x[i + 1]) / diag[i];
  }
  return x;
}

/// Smallest eigenvalue of tridiag(-1, 2, -1)/h^2 (size n) by inverse power
/// iteration with a Rayleigh quotient.
inline double smallest_dirichlet_eigenvalue(int n, double h, int iterations = 200)
{
  std::vector<double> v(static_cast<size_t>(n), 1.0);
  const double s = 1.0 / (h * h);
  double rayleigh = 0.0;
  for (int it = 0; it < iterations; ++it)
  {
    std::vector<double> sub(n, -s), diag(n, 2.0 * s), super(n, -s);
    std::vector<double> w = thomas(sub, diag, super, v);
    double norm = 0.0;
    for (double x : w)
    {
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i)
    {
      v[i] = w[i] / norm;
    }
    double num = 0.0;
    for (int i = 0; i < n; ++i)
    {
      const double left = i > 0 ? v[i - 1] : 0.0;
      const double right = i + 1 < n ? v[i + 1] : 0.0;
      num += v[i] * (2.0 * v[i] - left - right) * s;
    }
    rayleigh = num;
  }
  return rayleigh;
}

/// Root of a continuous f on [lo, hi] with a sign change.
inline double bisect(const std::function<double(double)>& f, double lo,
                     double hi, int iterations = 200)
{
  double flo = f(lo);
  for (int it = 0; it < iterations; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0))
    {
      lo = mid;
      flo = fm;
    }
    else
    {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Newton's method for the discrete steady state
///   -(u_{i+1} - 2u_i + u_{i-1})/h^2 + c u_i^3 - k u_i = 0,  u_0 = u_{n+1} = 0,
/// started from `guess`.
inline std::vector<double> newton_cubic_steady_state(std::vector<double> u,
                                                     double h, double c,
                                                     double k,
                                                     int iterations = 100)
{
  const size_t n = u.size();
  const double s = 1.0 / (h * h);
  for (int it = 0; it < iterations; ++it)
  {
    std::vector<double> sub(n, -s), diag(n), super(n, -s), rhs(n);
    double norm = 0.0;
    for (size_t i = 0; i < n; ++i)
    {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      const double F =
          (2.0 * u[i] - left - right) * s + c * u[i] * u[i] * u[i] - k * u[i];
      diag[i] = 2.0 * s + 3.0 * c * u[i] * u[i] - k;
      rhs[i] = -F;
      norm = std::max(norm, std::fabs(F));
    }
    if (norm < 1e-13)
    {
      break;
    }
    const std::vector<double> du = thomas(sub, diag, super, rhs);
    for (size_t i = 0; i < n; ++i)
    {
      u[i] += du[i];
    }
  }
  return u;
}

/// sum h u_i^2.
inline double weighted_sum_sq(const std::vector<double>& u, double h)
{
  double s = 0.0;
  for (double v : u)
  {
    s += v * v;
  }
  return h * s;
}

/// Least-squares line y = a + b x; returns {a, b, R^2}.
struct LineFit
{
  double intercept;
  double slope;
  double r2;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i)
  {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i)
  {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double b = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {my - b * mx, b, r2};
}

/// Small deterministic generator for property tests.
class Rng
{
public:
  explicit Rng(unsigned long long seed) : engine_(seed) {}

  double uniform(double lo, double hi)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  int integer(int lo, int hi)
  {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  std::vector<double> vector(size_t n, double lo, double hi)
  {
    std::vector<double> v(n);
    for (double& x : v)
    {
      x = uniform(lo, hi);
    }
    return v;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace oracle
