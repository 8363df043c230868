#include "dnflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dnflow/error.hpp"

namespace dnflow
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kProxMaxIterations = 100;
constexpr double kProxTolerance = 1e-12;

void RequireP(double p)
{
  if (!(p >= 2.0) || !std::isfinite(p))
  {
    throw PreconditionError("dissipation exponent p must satisfy p >= 2");
  }
}
}  // namespace

double psi_eval(const GridFunction& u, double p)
{
  RequireP(p);
  return lp_norm_pow(u, p) / p;
}

GridFunction psi_grad(const GridFunction& u, double p)
{
  RequireP(p);
  GridFunction out(u.grid());
  for (int i = 0; i < u.size(); ++i)
  {
    out[i] = alpha_apply(u[i], p);
  }
  return out;
}

// ---------------------------------------------------------------------------

ConvexPotential ConvexPotential::Zero()
{
  return ConvexPotential(Kind::Zero, 2.0, 0.0, 0.0, 0.0);
}

ConvexPotential ConvexPotential::Power(double sigma, double scale)
{
  if (!(sigma > 1.0) || !std::isfinite(sigma))
  {
    throw PreconditionError("power potential needs sigma > 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale))
  {
    throw PreconditionError("power potential needs a positive scale");
  }
  return ConvexPotential(Kind::Power, sigma, scale, 0.0, 0.0);
}

ConvexPotential ConvexPotential::Indicator(double a, double b)
{
  if (!(a <= 0.0 && 0.0 <= b) || !std::isfinite(a) || !std::isfinite(b))
  {
    throw PreconditionError("indicator interval must satisfy a <= 0 <= b");
  }
  return ConvexPotential(Kind::Indicator, 2.0, 0.0, a, b);
}

double ConvexPotential::eval(double r) const
{
  switch (kind_)
  {
    case Kind::Zero:
      return 0.0;
    case Kind::Power:
      return scale_ / sigma_ * pow_abs(r, sigma_);
    case Kind::Indicator:
      return (r >= a_ && r <= b_) ? 0.0 : kInf;
  }
  return 0.0;
}

bool ConvexPotential::in_domain(double r) const
{
  return kind_ != Kind::Indicator || (r >= a_ && r <= b_);
}

double ConvexPotential::prox(double x, double tau) const
{
  if (!(tau > 0.0))
  {
    throw PreconditionError("prox step must be positive");
  }
  switch (kind_)
  {
    case Kind::Zero:
      return x;
    case Kind::Indicator:
      return std::clamp(x, a_, b_);
    case Kind::Power:
      return power_prox(x, tau);
  }
  return x;
}

double ConvexPotential::power_prox(double x, double tau) const
{
  const double ax = std::fabs(x);
  if (ax == 0.0)
  {
    return 0.0;
  }
  const double k = tau * scale_;
  if (sigma_ == 2.0)
  {
    return x / (1.0 + k);
  }

  // Solve r + k r^{sigma-1} = |x| on [0, |x|]; the left side is increasing.
  auto residual = [&](double r) { return r + k * pow_abs(r, sigma_ - 1.0) - ax; };
  auto slope = [&](double r) {
    return 1.0 + k * (sigma_ - 1.0) * pow_abs(r, sigma_ - 2.0);
  };

  double r;
  if (sigma_ == 4.0)
  {
    // Real root of r^3 + P r - Q = 0, P = 1/k, Q = |x|/k, in cancellation-free
    // form; Newton below polishes the last digits.
    const double P = 1.0 / k;
    const double Q = ax / k;
    const double s = std::sqrt(0.25 * Q * Q + P * P * P / 27.0);
    const double A = std::cbrt(0.5 * Q + s);
    r = std::clamp(A - P / (3.0 * A), 0.0, ax);
  }
  else
  {
    r = std::min(ax, std::pow(ax / k, 1.0 / (sigma_ - 1.0)));
  }

  // Newton runs to full precision because callers divide the prox error by
  // tau; the documented tolerance only decides success after the loop.
  double lo = 0.0;
  double hi = ax;
  const double polish = 4.0 * std::numeric_limits<double>::epsilon() * ax;
  const double tol = kProxTolerance * std::max(1.0, ax);
  double f = residual(r);
  for (int it = 0; it < kProxMaxIterations; ++it)
  {
    if (std::fabs(f) <= polish)
    {
      break;
    }
    if (f > 0.0)
    {
      hi = r;
    }
    else
    {
      lo = r;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
    {
      break;
    }
    const double d = slope(r);
    double next = std::isfinite(d) ? r - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
    {
      next = 0.5 * (lo + hi);
    }
    if (next == r)
    {
      break;
    }
    r = next;
    f = residual(r);
  }
  if (std::fabs(f) <= tol)
  {
    return std::copysign(r, x);
  }
  throw SolverFailure("prox of power potential did not converge",
                      std::fabs(f));
}

double ConvexPotential::nearest_subgradient(double r, double target) const
{
  switch (kind_)
  {
    case Kind::Zero:
      return 0.0;
    case Kind::Power:
      return scale_ * alpha_apply(r, sigma_);
    case Kind::Indicator:
      if (a_ == b_)
      {
        return target;
      }
      if (r >= b_)
      {
        return std::max(target, 0.0);
      }
      if (r <= a_)
      {
        return std::min(target, 0.0);
      }
      return 0.0;
  }
  return 0.0;
}

double ConvexPotential::coercivity_c8() const
{
  switch (kind_)
  {
    case Kind::Power:
      return scale_ / sigma_;
    case Kind::Indicator:
    case Kind::Zero:
      return 0.0;
  }
  return 0.0;
}

std::string ConvexPotential::describe() const
{
  std::ostringstream os;
  switch (kind_)
  {
    case Kind::Zero:
      os << "zero";
      break;
    case Kind::Power:
      os << "power(sigma=" << sigma_ << ", scale=" << scale_ << ")";
      break;
    case Kind::Indicator:
      os << "indicator[" << a_ << ", " << b_ << "]";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace
{
void RequireStrength(double v)
{
  if (!std::isfinite(v))
  {
    throw PreconditionError("perturbation strength must be finite");
  }
}
}  // namespace

PerturbationFamily PerturbationFamily::None()
{
  return PerturbationFamily(Kind::None, 0.0, 0, 2.0, 2.0);
}

PerturbationFamily PerturbationFamily::Linear(double kappa)
{
  RequireStrength(kappa);
  return PerturbationFamily(Kind::Linear, kappa, 0, 2.0, 2.0);
}

PerturbationFamily PerturbationFamily::CubicWell(double kappa)
{
  RequireStrength(kappa);
  return PerturbationFamily(Kind::CubicWell, kappa, 0, 2.0, 2.0);
}

PerturbationFamily PerturbationFamily::Modulated(double kappa, int mode)
{
  RequireStrength(kappa);
  if (mode < 1)
  {
    throw PreconditionError("modulation mode must be >= 1");
  }
  return PerturbationFamily(Kind::Modulated, kappa, mode, 2.0, 2.0);
}

PerturbationFamily PerturbationFamily::Power(double kappa, double q)
{
  RequireStrength(kappa);
  if (!(q > 1.0) || !std::isfinite(q))
  {
    throw PreconditionError("power perturbation needs q > 1");
  }
  return PerturbationFamily(Kind::Power, kappa, 0, q, 2.0);
}

PerturbationFamily PerturbationFamily::GradientLinear(double b)
{
  RequireStrength(b);
  return PerturbationFamily(Kind::GradientLinear, b, 0, 2.0, 2.0);
}

PerturbationFamily PerturbationFamily::GradientPower(double b, double q2)
{
  RequireStrength(b);
  if (!(q2 > 1.0) || !std::isfinite(q2))
  {
    throw PreconditionError("gradient power perturbation needs q2 > 1");
  }
  return PerturbationFamily(Kind::GradientPower, b, 0, 2.0, q2);
}

PerturbationFamily PerturbationFamily::with_strength(double strength) const
{
  RequireStrength(strength);
  PerturbationFamily copy = *this;
  copy.strength_ = strength;
  return copy;
}

double PerturbationFamily::growth_constant(double p) const
{
  if (kind_ == Kind::None)
  {
    return 0.0;
  }
  // |kappa * m(x)|^{p'} with |m| <= 1 for every family.
  return std::pow(std::fabs(strength_), dual_exponent(p));
}

double PerturbationFamily::value(double x, double length, double r,
                                 double s) const
{
  switch (kind_)
  {
    case Kind::None:
      return 0.0;
    case Kind::Linear:
    case Kind::CubicWell:
      return -strength_ * r;
    case Kind::Modulated:
      return -strength_ * std::sin(mode_ * std::numbers::pi * x / length) * r;
    case Kind::Power:
      return -strength_ * alpha_apply(r, q_);
    case Kind::GradientLinear:
      return strength_ * s;
    case Kind::GradientPower:
      return strength_ * alpha_apply(s, q2_);
  }
  return 0.0;
}

std::string PerturbationFamily::describe() const
{
  std::ostringstream os;
  switch (kind_)
  {
    case Kind::None:
      os << "none";
      break;
    case Kind::Linear:
      os << "linear(kappa=" << strength_ << ")";
      break;
    case Kind::CubicWell:
      os << "cubic_well(kappa=" << strength_ << ")";
      break;
    case Kind::Modulated:
      os << "modulated(kappa=" << strength_ << ", k=" << mode_ << ")";
      break;
    case Kind::Power:
      os << "power(kappa=" << strength_ << ", q=" << q_ << ")";
      break;
    case Kind::GradientLinear:
      os << "gradient_linear(b=" << strength_ << ")";
      break;
    case Kind::GradientPower:
      os << "gradient_power(b=" << strength_ << ", q2=" << q2_ << ")";
      break;
  }
  return os.str();
}

GridFunction perturbation_apply(const GridFunction& u,
                                const std::optional<GridFunction>& du,
                                const PerturbationFamily& family)
{
  if (family.depends_on_gradient())
  {
    if (!du.has_value())
    {
      throw PreconditionError(
          "gradient-dependent perturbation needs a difference field");
    }
    if (!(du->grid() == u.grid()))
    {
      throw PreconditionError("difference field lives on a different grid");
    }
  }
  const Grid1D& grid = u.grid();
  GridFunction out(grid);
  for (int i = 0; i < u.size(); ++i)
  {
    const double s = du.has_value() ? (*du)[i] : 0.0;
    out[i] = family.value(grid.node(i), grid.length(), u[i], s);
  }
  return out;
}

GridFunction perturbation_apply(const GridFunction& u,
                                const PerturbationFamily& family)
{
  if (family.depends_on_gradient())
  {
    return perturbation_apply(u, backward_difference(u), family);
  }
  return perturbation_apply(u, std::nullopt, family);
}

}  // namespace dnflow
