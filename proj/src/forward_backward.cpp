#include "dnflow/forward_backward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnflow/error.hpp"
#include "dnflow/power.hpp"

namespace dnflow
{
namespace
{
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kDecrease = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kMinTau = 1e-300;

void Validate(const Subproblem& sp)
{
  if (sp.u_prev == nullptr || sp.rhs == nullptr || sp.pot == nullptr)
  {
    throw PreconditionError("subproblem is missing data");
  }
  if (!(sp.u_prev->grid() == sp.rhs->grid()))
  {
    throw PreconditionError("subproblem data live on different grids");
  }
  if (!(sp.h_t > 0.0) || !(sp.p >= 2.0) || !(sp.m > 1.0))
  {
    throw PreconditionError("subproblem needs h_t > 0, p >= 2, m > 1");
  }
}

class Evaluator
{
public:
  explicit Evaluator(const Subproblem& sp)
      : sp_(sp),
        u_(sp.u_prev->vector()),
        r_(sp.rhs->vector()),
        n_(sp.u_prev->size()),
        h_(sp.u_prev->grid().h()),
        pd_(dual_exponent(sp.p))
  {
  }

  double Smooth(const std::vector<double>& v) const
  {
    const double ht = sp_.h_t;
    double rate = 0.0;
    double lin = 0.0;
    double grad = 0.0;
    double left = 0.0;
    for (int i = 0; i < n_; ++i)
    {
      rate += pow_abs((v[i] - u_[i]) / ht, sp_.p);
      lin += r_[i] * v[i];
      grad += pow_abs((v[i] - left) / h_, sp_.m);
      left = v[i];
    }
    grad += pow_abs(left / h_, sp_.m);
    return h_ * (ht * rate / sp_.p + grad / sp_.m - lin);
  }

  double Separable(const std::vector<double>& v) const
  {
    if (sp_.pot->kind() == ConvexPotential::Kind::Zero)
    {
      return 0.0;
    }
    double sum = 0.0;
    for (double x : v)
    {
      sum += sp_.pot->eval(x);
    }
    return h_ * sum;
  }

  double Objective(const std::vector<double>& v) const
  {
    return Smooth(v) + Separable(v);
  }

  void Gradient(const std::vector<double>& v, std::vector<double>& out) const
  {
    const double ht = sp_.h_t;
    double left_flux = alpha_apply(v[0] / h_, sp_.m);
    for (int i = 0; i < n_; ++i)
    {
      const double next = (i + 1 < n_) ? v[i + 1] : 0.0;
      const double right_flux = alpha_apply((next - v[i]) / h_, sp_.m);
      out[i] = alpha_apply((v[i] - u_[i]) / ht, sp_.p) -
               (right_flux - left_flux) / h_ - r_[i];
      left_flux = right_flux;
    }
  }

  double DualNorm(const std::vector<double>& x) const
  {
    double sum = 0.0;
    for (double v : x)
    {
      sum += pow_abs(v, pd_);
    }
    return std::pow(h_ * sum, 1.0 / pd_);
  }

  double Stationarity(const std::vector<double>& v,
                      const std::vector<double>& grad) const
  {
    double sum = 0.0;
    for (int i = 0; i < n_; ++i)
    {
      if (!sp_.pot->in_domain(v[i]))
      {
        return std::numeric_limits<double>::infinity();
      }
      const double s = sp_.pot->nearest_subgradient(v[i], -grad[i]);
      sum += pow_abs(grad[i] + s, pd_);
    }
    return std::pow(h_ * sum, 1.0 / pd_);
  }

  /// Size of the individual operator terms at v, used to keep the absolute
  /// tolerance above the round-off floor for large states.
  double TermScale(const std::vector<double>& v) const
  {
    std::vector<double> lap(n_);
    std::vector<double> jp(n_);
    double left_flux = alpha_apply(v[0] / h_, sp_.m);
    for (int i = 0; i < n_; ++i)
    {
      const double next = (i + 1 < n_) ? v[i + 1] : 0.0;
      const double right_flux = alpha_apply((next - v[i]) / h_, sp_.m);
      lap[i] = (std::fabs(right_flux) + std::fabs(left_flux)) / h_;
      left_flux = right_flux;
      jp[i] = sp_.pot->kind() == ConvexPotential::Kind::Power
                  ? sp_.pot->nearest_subgradient(v[i], 0.0)
                  : 0.0;
    }
    return DualNorm(lap) + DualNorm(r_) + DualNorm(jp);
  }

  double WeightedSquare(const std::vector<double>& a,
                        const std::vector<double>& b) const
  {
    double sum = 0.0;
    for (int i = 0; i < n_; ++i)
    {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    return h_ * sum;
  }

  double WeightedCross(const std::vector<double>& ga,
                       const std::vector<double>& gb,
                       const std::vector<double>& a,
                       const std::vector<double>& b) const
  {
    double sum = 0.0;
    for (int i = 0; i < n_; ++i)
    {
      sum += (ga[i] - gb[i]) * (a[i] - b[i]);
    }
    return h_ * sum;
  }

  int size() const { return n_; }

private:
  const Subproblem& sp_;
  const std::vector<double>& u_;
  const std::vector<double>& r_;
  int n_;
  double h_;
  double pd_;
};
}  // namespace

double subproblem_objective(const Subproblem& sp, const GridFunction& v)
{
  Validate(sp);
  return Evaluator(sp).Objective(v.vector());
}

GridFunction subproblem_gradient(const Subproblem& sp, const GridFunction& v)
{
  Validate(sp);
  std::vector<double> g(static_cast<size_t>(v.size()));
  Evaluator(sp).Gradient(v.vector(), g);
  return GridFunction(v.grid(), std::move(g));
}

double subproblem_stationarity(const Subproblem& sp, const GridFunction& v)
{
  Validate(sp);
  Evaluator ev(sp);
  std::vector<double> g(static_cast<size_t>(v.size()));
  ev.Gradient(v.vector(), g);
  return ev.Stationarity(v.vector(), g);
}

SubproblemResult solve_subproblem(const Subproblem& sp, const GridFunction& v0,
                                  const SubproblemOptions& options)
{
  Validate(sp);
  if (!(v0.grid() == sp.u_prev->grid()))
  {
    throw PreconditionError("initial iterate lives on a different grid");
  }
  if (!(options.tol > 0.0) || options.max_iter < 1)
  {
    throw PreconditionError("solver needs tol > 0 and max_iter >= 1");
  }
  const Evaluator ev(sp);
  const ConvexPotential& pot = *sp.pot;
  const int n = ev.size();

  std::vector<double> v = v0.vector();
  if (pot.kind() == ConvexPotential::Kind::Indicator)
  {
    for (double& x : v)
    {
      x = std::clamp(x, pot.lower(), pot.upper());
    }
  }

  const double tol =
      std::max(options.tol, 16.0 * kEps * ev.TermScale(v));

  std::vector<double> grad(static_cast<size_t>(n));
  std::vector<double> trial(static_cast<size_t>(n));
  std::vector<double> grad_trial(static_cast<size_t>(n));
  std::vector<double> step(static_cast<size_t>(n));

  ev.Gradient(v, grad);
  double theta = ev.Objective(v);
  double stat = ev.Stationarity(v, grad);
  double prox_gradient = 0.0;
  double tau = 1.0;

  SubproblemResult result{GridFunction(v0.grid())};
  result.tol_used = tol;
  auto finish = [&](int iterations) {
    result.v = GridFunction(v0.grid(), v);
    result.iterations = iterations;
    result.tau = tau;
    result.stationarity = stat;
    result.prox_gradient = prox_gradient;
    return result;
  };

  if (stat <= tol)
  {
    return finish(0);
  }

  for (int it = 1; it <= options.max_iter; ++it)
  {
    double moved2 = 0.0;
    double theta_trial = 0.0;
    while (true)
    {
      for (int i = 0; i < n; ++i)
      {
        trial[i] = pot.prox(v[i] - tau * grad[i], tau);
      }
      moved2 = ev.WeightedSquare(trial, v);
      if (moved2 == 0.0)
      {
        // v is a fixed point of the prox-gradient map at this tau.
        stat = ev.Stationarity(v, grad);
        prox_gradient = 0.0;
        if (stat <= tol)
        {
          return finish(it);
        }
        throw SolverFailure("forward-backward stalled above tolerance", stat,
                            v);
      }
      theta_trial = ev.Objective(trial);
      ev.Gradient(trial, grad_trial);
      const double slack = 64.0 * kEps * (std::fabs(theta) + 1.0);
      const bool decrease =
          theta_trial <= theta - kDecrease * moved2 / tau + slack;
      // Local Lipschitz test on the smooth gradient; rejects steps that
      // decrease the objective only by flipping high-frequency modes.
      const bool lipschitz =
          tau * ev.WeightedCross(grad_trial, grad, trial, v) <=
          moved2 * (1.0 + 1e-12);
      if (decrease && lipschitz)
      {
        break;
      }
      tau *= kShrink;
      if (tau < kMinTau)
      {
        throw SolverFailure("forward-backward step size collapsed", stat, v);
      }
    }

    for (int i = 0; i < n; ++i)
    {
      step[i] = (v[i] - trial[i]) / tau;
    }
    prox_gradient = ev.DualNorm(step);
    v.swap(trial);
    grad.swap(grad_trial);
    theta = theta_trial;
    stat = ev.Stationarity(v, grad);
    if (stat <= tol && prox_gradient <= tol)
    {
      return finish(it);
    }
  }
  throw SolverFailure("forward-backward reached the iteration limit", stat, v);
}

}  // namespace dnflow
