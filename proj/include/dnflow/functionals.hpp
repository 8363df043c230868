#pragma once

#include <optional>
#include <string>

#include "dnflow/grid.hpp"
#include "dnflow/power.hpp"

namespace dnflow
{
/// (1/p) sum_i h |u_i|^p.
double psi_eval(const GridFunction& u, double p);

/// Nodewise alpha(u_i); the gradient of psi_eval in the weighted inner product.
GridFunction psi_grad(const GridFunction& u, double p);

/// Convex, lower semicontinuous j : R -> [0, +inf] with j(0) = 0.
///
/// Power: (c/sigma)|r|^sigma, sigma > 1, c > 0.
/// Indicator: 0 on [a, b] (a <= 0 <= b), +inf elsewhere.
/// Zero: j == 0.
class ConvexPotential
{
public:
  enum class Kind
  {
    Zero,
    Power,
    Indicator
  };

  static ConvexPotential Zero();
  static ConvexPotential Power(double sigma, double scale);
  static ConvexPotential Indicator(double a, double b);

  Kind kind() const noexcept { return kind_; }
  double sigma() const noexcept { return sigma_; }
  double scale() const noexcept { return scale_; }
  double lower() const noexcept { return a_; }
  double upper() const noexcept { return b_; }

  /// j(r); +inf off [a, b] for the indicator.
  double eval(double r) const;

  bool in_domain(double r) const;

  /// argmin_r (r - x)^2/(2 tau) + j(r). Throws SolverFailure if the scalar
  /// solve for a general power does not converge.
  double prox(double x, double tau) const;

  /// Element s of the subdifferential at r closest to `target`. The
  /// subdifferential must be nonempty (r in the domain).
  double nearest_subgradient(double r, double target) const;

  /// Coercivity constants of C8 |r|^sigma <= j(r) + C9.
  double coercivity_c8() const;
  double coercivity_c9() const { return 0.0; }

  std::string describe() const;

  bool operator==(const ConvexPotential&) const = default;

private:
  ConvexPotential(Kind kind, double sigma, double scale, double a, double b)
      : kind_(kind), sigma_(sigma), scale_(scale), a_(a), b_(b)
  {
  }

  double power_prox(double x, double tau) const;

  Kind kind_;
  double sigma_;
  double scale_;
  double a_;
  double b_;
};

/// Single-valued Carathéodory perturbations g(x, r) or h(x, r, s).
class PerturbationFamily
{
public:
  enum class Kind
  {
    None,
    Linear,          // g = -kappa r
    CubicWell,       // g = -kappa r, paired with a quartic j
    Modulated,       // g = -kappa sin(k pi x / L) r
    Power,           // g = -kappa |r|^{q-2} r
    GradientLinear,  // h = b s
    GradientPower    // h = b |s|^{q2-2} s
  };

  static PerturbationFamily None();
  static PerturbationFamily Linear(double kappa);
  static PerturbationFamily CubicWell(double kappa);
  static PerturbationFamily Modulated(double kappa, int mode);
  static PerturbationFamily Power(double kappa, double q);
  static PerturbationFamily GradientLinear(double b);
  static PerturbationFamily GradientPower(double b, double q2);

  Kind kind() const noexcept { return kind_; }
  double strength() const noexcept { return strength_; }
  int mode() const noexcept { return mode_; }

  /// Copy with the strength parameter (kappa or b) replaced.
  PerturbationFamily with_strength(double strength) const;

  bool depends_on_gradient() const noexcept
  {
    return kind_ == Kind::GradientLinear || kind_ == Kind::GradientPower;
  }

  /// Declared growth exponents; q for g families, q1/q2 for h families.
  double q() const noexcept { return q_; }
  double q2() const noexcept { return q2_; }

  /// Constant C10 (g families) or C13 (h families) of the growth bound
  /// |g|^{p'} <= C |r|^{p'(q-1)}; a1 = a2 = 0 for every shipped family.
  double growth_constant(double p) const;

  /// Pointwise value at node coordinate x (domain length L), state r and
  /// difference s.
  double value(double x, double length, double r, double s) const;

  std::string describe() const;

  bool operator==(const PerturbationFamily&) const = default;

private:
  PerturbationFamily(Kind kind, double strength, int mode, double q, double q2)
      : kind_(kind), strength_(strength), mode_(mode), q_(q), q2_(q2)
  {
  }

  Kind kind_;
  double strength_;
  int mode_;
  double q_;
  double q2_;
};

/// Nodewise perturbation values. Gradient families read the supplied
/// difference field `du`; a missing field is a precondition error.
GridFunction perturbation_apply(const GridFunction& u,
                                const std::optional<GridFunction>& du,
                                const PerturbationFamily& family);

/// Convenience overload computing backward differences when needed.
GridFunction perturbation_apply(const GridFunction& u,
                                const PerturbationFamily& family);

}  // namespace dnflow
