#include "dnflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dnflow/error.hpp"
#include "dnflow/functionals.hpp"
#include "dnflow/power.hpp"
#include "json.hpp"

namespace dnflow
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCertTol = 1e-9;
constexpr int kLadderLow = -3;
constexpr int kLadderSize = 16;
constexpr int kSlopePoints = 4;
constexpr double kGrowthSlopeLimit = 0.1;
constexpr int kFourierModes = 24;

double Slope(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
  {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

double Normalized(double slack, double a, double b)
{
  return slack / std::max({1.0, std::fabs(a), std::fabs(b)});
}

/// Minimal-norm element of -Delta_m u + dj(u).
GridFunction MinimalSection(const GridFunction& u, const ProblemSpec& spec)
{
  const GridFunction lap = m_laplacian(u, spec.m);
  GridFunction xi(u.grid());
  for (int i = 0; i < u.size(); ++i)
  {
    xi[i] = -lap[i] + spec.pot.nearest_subgradient(u[i], lap[i]);
  }
  return xi;
}

/// Unweighted perturbation g(u) (or h(u, Du)).
GridFunction RawPerturbation(const GridFunction& u, const ProblemSpec& spec)
{
  if (spec.fam.kind() == PerturbationFamily::Kind::None)
  {
    return GridFunction(u.grid());
  }
  return perturbation_apply(u, spec.fam);
}

struct Sample
{
  int shape = 0;
  int scale = 0;  // ladder index
  GridFunction u;
};

std::vector<Sample> Ladder(const ProblemSpec& spec, int count,
                           std::uint64_t seed, int& discarded)
{
  const std::vector<GridFunction> states =
      sample_states(spec.grid, count, seed);
  std::vector<Sample> out;
  discarded = 0;
  for (size_t k = 0; k < states.size(); ++k)
  {
    if (!std::isfinite(phi(states[k], spec)))
    {
      ++discarded;
      continue;
    }
    out.push_back(Sample{static_cast<int>(k / kLadderSize),
                         static_cast<int>(k % kLadderSize), states[k]});
  }
  return out;
}

double LadderScale(int index) { return std::ldexp(1.0, kLadderLow + index); }

/// Largest log-log slope of y against x over the top of each shape's ladder.
double TopSlope(const std::vector<Sample>& samples,
                const std::vector<double>& x, const std::vector<double>& y)
{
  double worst = -kInf;
  size_t begin = 0;
  while (begin < samples.size())
  {
    size_t end = begin;
    while (end < samples.size() && samples[end].shape == samples[begin].shape)
    {
      ++end;
    }
    // A vanishing value at the top of the ladder means y stays bounded there.
    std::vector<double> lx, ly;
    bool vanished = false;
    for (size_t k = end; k > begin && static_cast<int>(lx.size()) < kSlopePoints;
         --k)
    {
      if (!(y[k - 1] > 0.0) || !(x[k - 1] > 0.0))
      {
        vanished = true;
        break;
      }
      lx.push_back(std::log(x[k - 1]));
      ly.push_back(std::log(y[k - 1]));
    }
    if (!vanished && lx.size() >= 2)
    {
      worst = std::max(worst, Slope(lx, ly));
    }
    begin = end;
  }
  return worst;
}

// Exponent comparisons treat relative differences below 1e-12 as equality,
// so boundary cases such as p'(q - 1) = sigma classify as intended.
bool Leq(double a, double b)
{
  return std::isinf(b) ? a <= b : a <= b + 1e-12 * std::fabs(b);
}
bool Less(double a, double b)
{
  return std::isinf(b) ? a < b : a < b - 1e-12 * std::fabs(b);
}

double Critical(int N, double a)
{
  return N > a ? N * a / (N - a) : kInf;
}

void RequireSteps(const Trajectory& traj, std::size_t minimum)
{
  if (traj.size() < minimum + 1 || traj.energies.size() != traj.size() ||
      traj.times.size() != traj.size())
  {
    throw PreconditionError("trajectory needs at least " +
                            std::to_string(minimum) +
                            " steps with recorded energies");
  }
}

nlohmann::json Number(double v)
{
  if (std::isfinite(v))
  {
    return v;
  }
  if (std::isnan(v))
  {
    return "nan";
  }
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json ReportJson(const ConditionReport& r)
{
  nlohmann::json j;
  j["condition"] = r.condition;
  j["holds"] = r.holds;
  nlohmann::json constants = nlohmann::json::object();
  for (const auto& [k, v] : r.constants)
  {
    constants[k] = Number(v);
  }
  j["constants"] = constants;
  j["margin"] = Number(r.margin);
  j["samples"] = r.samples;
  j["discarded"] = r.discarded;
  if (!r.classification.empty())
  {
    j["classification"] = r.classification;
  }
  j["checks"] = nlohmann::json(r.checks);
  j["notes"] = r.notes;
  return j;
}
}  // namespace

double DissipationFit::entry_time(double s) const
{
  return std::log(s + 1.0) / beta;
}

int sample_ladder_size() { return kLadderSize; }

std::vector<GridFunction> sample_states(const Grid1D& grid, int count,
                                        std::uint64_t seed)
{
  if (count < 1)
  {
    throw PreconditionError("sample count must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int shapes = (count + kLadderSize - 1) / kLadderSize;
  const int n = grid.n();
  const int modes = std::min(n, kFourierModes);
  const double L = grid.length();
  std::vector<GridFunction> out;
  out.reserve(static_cast<size_t>(shapes * kLadderSize));
  for (int b = 0; b < shapes; ++b)
  {
    GridFunction shape(grid);
    const int kind = b % 4;
    if (kind == 3)
    {
      shape = dirichlet_principal_eigenvector(grid);
      if (coef(rng) < 0.0)
      {
        shape *= -1.0;
      }
    }
    else
    {
      const double decay = kind + 1.0;
      std::vector<double> a(static_cast<size_t>(modes));
      for (int k = 0; k < modes; ++k)
      {
        a[static_cast<size_t>(k)] = coef(rng) * std::pow(k + 1.0, -decay);
      }
      for (int i = 0; i < n; ++i)
      {
        const double x = grid.node(i);
        double s = 0.0;
        for (int k = 0; k < modes; ++k)
        {
          s += a[static_cast<size_t>(k)] *
               std::sin((k + 1) * std::numbers::pi * x / L);
        }
        shape[i] = s;
      }
    }
    double peak = 0.0;
    for (double v : shape.values())
    {
      peak = std::max(peak, std::fabs(v));
    }
    if (peak == 0.0)
    {
      shape = dirichlet_principal_eigenvector(grid);
      peak = 1.0;
    }
    shape *= 1.0 / peak;
    for (int j = 0; j < kLadderSize; ++j)
    {
      out.push_back(LadderScale(j) * shape);
    }
  }
  return out;
}

ConditionReport check_A1_A2(const ProblemSpec& spec, int samples,
                            std::uint64_t seed)
{
  spec.validate();
  const double p = spec.p;
  const double pd = dual_exponent(p);
  ConditionReport r;
  r.condition = "A1_A2";
  r.constants = {{"C1", 1.0 / p}, {"C2", 0.0}, {"C3", p}, {"C4", 0.0},
                 {"C5", 0.0}};
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  double a2p_margin = kInf;
  for (const GridFunction& u : sample_states(spec.grid, samples, seed))
  {
    const double psi = psi_eval(u, p);
    const GridFunction eta = psi_grad(u, p);
    const double norm_p = lp_norm_pow(u, p);
    const double dual = lp_norm_pow(eta, pd);
    const double pairing = weighted_dot(eta, u);
    e1 = std::max(e1, std::fabs(norm_p / p - psi) / psi);
    e2 = std::max(e2, std::fabs(dual - p * psi) / (p * psi));
    e3 = std::max(e3, std::fabs(pairing - p * psi) / (p * psi));
    a2p_margin = std::min(a2p_margin, (pairing - 0.5 * psi) / psi);
    ++r.samples;
  }
  r.constants["max_error_A1"] = e1;
  r.constants["max_error_A2"] = e2;
  r.constants["max_error_A2_prime"] = e3;
  r.margin = -std::max({e1, e2, e3});
  r.checks["A1"] = e1 < 1e-10;
  r.checks["A2"] = e2 < 1e-10;
  r.checks["A2_prime"] = e3 < 1e-10 && a2p_margin >= -kCertTol;
  r.holds = r.checks["A1"] && r.checks["A2"] && r.checks["A2_prime"];
  return r;
}

ConditionReport check_B1(const ProblemSpec& spec, int samples, double eps,
                         std::uint64_t seed)
{
  spec.validate();
  if (!(eps >= 0.0) || !std::isfinite(eps))
  {
    throw PreconditionError("eps must be finite and nonnegative");
  }
  const double pd = dual_exponent(spec.p);
  const double sigma_dual = std::min(2.0, pd);
  ConditionReport r;
  r.condition = "B1_eps";
  const std::vector<Sample> set = Ladder(spec, samples, seed, r.discarded);
  const size_t count = set.size();
  std::vector<double> num(count), den(count), size(count), scale(count);
  double c = 0.0;
  for (size_t k = 0; k < count; ++k)
  {
    const GridFunction& u = set[k].u;
    const double G = lp_norm_pow(RawPerturbation(u, spec), pd);
    const double Xi = std::pow(lp_norm(MinimalSection(u, spec), pd), sigma_dual);
    const double energy = std::fabs(phi(u, spec)) + lp_norm_pow(u, spec.p);
    num[k] = std::max(0.0, G - eps * Xi);
    den[k] = energy + 1.0;
    size[k] = energy;
    scale[k] = LadderScale(set[k].scale);
    c = std::max(c, num[k] / den[k]);
  }
  double margin = kInf;
  for (size_t k = 0; k < count; ++k)
  {
    margin = std::min(margin, Normalized(c * den[k] - num[k], num[k], c * den[k]));
  }
  std::vector<double> ratio(count);
  for (size_t k = 0; k < count; ++k)
  {
    ratio[k] = num[k] / den[k];
  }
  const double growth = TopSlope(set, scale, ratio);
  const double r_eps = TopSlope(set, size, num);

  const ExponentSet e = exponents_of(spec);
  const bool strict =
      e.gradient ? (pd * (e.q1 - 1.0) < e.sigma && pd * (e.q2 - 1.0) < 2.0)
                 : pd * (e.q - 1.0) < std::max(e.m, e.sigma);

  r.samples = static_cast<int>(count);
  r.margin = count == 0 ? 0.0 : margin;
  r.constants = {{"eps", eps},
                 {"c_eps", c},
                 {"sigma_dual", sigma_dual},
                 {"growth_slope", growth},
                 {"r_eps_estimate", r_eps}};
  r.checks["certificate"] = r.margin >= -kCertTol;
  r.checks["bounded_growth"] = growth <= kGrowthSlopeLimit;
  r.checks["strict_B1_by_exponents"] = strict;
  r.holds = count > 0 && r.checks["certificate"] && r.checks["bounded_growth"];
  if (growth > kGrowthSlopeLimit)
  {
    r.notes.push_back("ratio to the energy keeps growing along the scaling ladder");
  }
  return r;
}

ConditionReport check_S1(const ProblemSpec& spec, int samples,
                         std::uint64_t seed)
{
  spec.validate();
  ConditionReport r;
  r.condition = "S1";
  const std::vector<Sample> set = Ladder(spec, samples, seed, r.discarded);
  const size_t count = set.size();
  std::vector<double> A(count), B(count), M(count);
  const double c8 = spec.pot.coercivity_c8();
  for (size_t k = 0; k < count; ++k)
  {
    const GridFunction& u = set[k].u;
    const GridFunction xi = MinimalSection(u, spec);
    const GridFunction lg = perturbation_term(u, spec);
    A[k] = weighted_dot(xi + lg, u);
    const double p1 = phi1(u, spec);
    B[k] = phi(u, spec) + lp_norm_pow(u, spec.p);
    M[k] = 0.5 * spec.m * p1 + 0.5 * c8 * lp_norm_pow(u, spec.sigma) - A[k];
  }
  // alpha from the top third of each shape's surviving ladder.
  double alpha = kInf;
  size_t begin = 0;
  while (begin < count)
  {
    size_t end = begin;
    while (end < count && set[end].shape == set[begin].shape)
    {
      ++end;
    }
    const size_t top = (end - begin + 2) / 3;
    for (size_t k = end - top; k < end; ++k)
    {
      if (B[k] > 0.0)
      {
        alpha = std::min(alpha, A[k] / B[k]);
      }
    }
    begin = end;
  }
  if (!std::isfinite(alpha))
  {
    alpha = 0.0;
  }
  double c6 = 0.0;
  double m_lambda = 0.0;
  for (size_t k = 0; k < count; ++k)
  {
    c6 = std::max(c6, alpha * B[k] - A[k]);
    m_lambda = std::max(m_lambda, M[k]);
  }
  double margin = count == 0 ? 0.0 : kInf;
  for (size_t k = 0; k < count; ++k)
  {
    margin = std::min(margin, Normalized(A[k] + c6 - alpha * B[k], A[k],
                                         std::max(alpha * B[k], c6)));
  }
  r.samples = static_cast<int>(count);
  r.margin = margin;
  r.constants = {{"alpha_S1", alpha}, {"C6", c6}, {"M_lambda", m_lambda}};
  r.checks["certificate"] = margin >= -kCertTol;
  r.checks["coercive"] = alpha > 0.0;
  r.holds = count > 0 && r.checks["certificate"] && r.checks["coercive"];
  return r;
}

ExponentSet exponents_of(const ProblemSpec& spec, int N)
{
  ExponentSet e;
  e.p = spec.p;
  e.m = spec.m;
  e.sigma = spec.sigma;
  e.q = spec.q;
  e.q1 = spec.q1;
  e.q2 = spec.q2;
  e.N = N;
  e.gradient = spec.fam.depends_on_gradient();
  e.single_valued_j = spec.pot.kind() != ConvexPotential::Kind::Indicator;
  return e;
}

ConditionReport classify_exponents(const ExponentSet& e)
{
  if (!(e.p > 1.0) || !(e.m > 1.0) || !(e.sigma > 1.0) || !(e.q > 1.0) ||
      !(e.q1 > 1.0) || !(e.q2 > 1.0) || e.N < 1)
  {
    throw PreconditionError("exponents must exceed 1 and N must be positive");
  }
  ConditionReport r;
  r.condition = "exponents";
  const double pd = dual_exponent(e.p);
  bool existence = false;
  bool attractor = false;
  bool arbitrary = false;
  if (!e.gradient)
  {
    const double m_star = Critical(e.N, e.m);
    const double g = pd * (e.q - 1.0);
    const bool base = Leq(2.0, e.p) && Less(e.p, std::max(m_star, e.sigma));
    const bool growth = Leq(g, std::max(e.m, e.p)) ||
                        (Less(e.sigma, m_star) ? Leq(g, e.sigma) : Less(g, e.sigma));
    const bool admissible = Leq(1.0, g);
    existence = base && growth && admissible;
    attractor = Leq(e.p, std::max(e.m, e.sigma));
    arbitrary = Less(g, std::max(e.m, e.sigma));
    r.constants = {{"p_dual", pd}, {"growth_exponent", g}, {"m_star", m_star}};
    r.checks = {{"base", base},
                {"growth", growth},
                {"q_admissible", admissible},
                {"attractor_exponent", attractor},
                {"lambda_arbitrary", arbitrary}};
  }
  else
  {
    const double two_star = Critical(e.N, 2.0);
    const double pd_dagger = e.N > 2.0 * pd ? e.N * pd / (e.N - 2.0 * pd) : kInf;
    const double pd_star = Critical(e.N, pd);
    const double g1 = pd * (e.q1 - 1.0);
    const double g2 = pd * (e.q2 - 1.0);
    const bool structure = e.m == 2.0 && e.single_valued_j;
    const bool base = Leq(2.0, e.p) && Less(e.p, std::max(two_star, e.sigma));
    const bool q1_ok =
        Leq(e.q1, e.p) || (Less(e.sigma, std::max(two_star, pd_dagger))
                               ? Leq(g1, e.sigma)
                               : Less(g1, e.sigma));
    const bool q2_ok = Less(2.0, pd_star) ? Leq(g2, 2.0) : Less(g2, 2.0);
    const bool admissible = Leq(1.0, g1) && Leq(1.0, g2);
    existence = structure && base && q1_ok && q2_ok && admissible;
    attractor = Leq(e.p, e.sigma);
    arbitrary = Less(g1, e.sigma) && Less(g2, 2.0);
    r.constants = {{"p_dual", pd},
                   {"growth_exponent_q1", g1},
                   {"growth_exponent_q2", g2},
                   {"two_star", two_star},
                   {"p_dual_dagger", pd_dagger},
                   {"p_dual_star", pd_star}};
    r.checks = {{"structure", structure},
                {"base", base},
                {"q1", q1_ok},
                {"q2", q2_ok},
                {"q_admissible", admissible},
                {"attractor_exponent", attractor},
                {"lambda_arbitrary", arbitrary}};
    if (!structure)
    {
      r.notes.push_back("gradient perturbations need m = 2 and single-valued dj");
    }
  }
  if (!existence)
  {
    r.classification = kNoGuarantee;
  }
  else if (!attractor)
  {
    r.classification = kExistenceOnly;
  }
  else
  {
    r.classification = arbitrary ? kAttractorAllLambda : kAttractorSmallLambda;
  }
  r.holds = existence;
  r.samples = 1;
  r.margin = 0.0;
  r.constants["N"] = e.N;
  return r;
}

ConditionReport check_exponents(const ProblemSpec& spec, int N)
{
  spec.validate();
  return classify_exponents(exponents_of(spec, N));
}

double perturbation_gamma(double p, double eps)
{
  const double pd = dual_exponent(p);
  const double k = std::pow(4.0, pd - 1.0);
  if (!(eps > 0.0) || !(eps < 1.0 / k))
  {
    throw PreconditionError("eps must lie in (0, 4^{1-p'})");
  }
  return k * eps * p / (1.0 - k * eps);
}

ConditionReport check_perturbation_bound(const Trajectory& traj,
                                         const ProblemSpec& spec, double eps)
{
  spec.validate();
  RequireSteps(traj, 1);
  const double gamma = perturbation_gamma(spec.p, eps);
  const double pd = dual_exponent(spec.p);
  const double f_term = lp_norm_pow(spec.f, pd);
  const size_t steps = traj.size() - 1;
  std::vector<double> G(steps), W(steps), psi(steps);
  double M = 0.0;
  for (size_t k = 1; k <= steps; ++k)
  {
    const GridFunction& state = spec.mode == CouplingMode::SemiImplicit
                                    ? traj.states[k - 1]
                                    : traj.states[k];
    const double h = traj.times[k] - traj.times[k - 1];
    G[k - 1] = lp_norm_pow(perturbation_term(state, spec), pd);
    W[k - 1] = f_term + std::fabs(phi(state, spec)) +
               lp_norm_pow(state, spec.p) + 1.0;
    psi[k - 1] = traj.energies[k].psi_step / h;
    M = std::max(M, std::max(0.0, G[k - 1] - gamma * psi[k - 1]) / W[k - 1]);
  }
  double margin = kInf;
  for (size_t k = 0; k < steps; ++k)
  {
    const double bound = M * W[k] + gamma * psi[k];
    margin = std::min(margin, Normalized(bound - G[k], bound, G[k]));
  }
  ConditionReport r;
  r.condition = "perturbation_bound";
  r.samples = static_cast<int>(steps);
  r.margin = margin;
  const double g1 = perturbation_gamma(spec.p, 1e-1);
  const double g2 = perturbation_gamma(spec.p, 1e-2);
  const double g3 = perturbation_gamma(spec.p, 1e-3);
  r.constants = {{"eps", eps},
                 {"gamma_eps", gamma},
                 {"M_eps", M},
                 {"gamma_at_1e-1", g1},
                 {"gamma_at_1e-2", g2},
                 {"gamma_at_1e-3", g3}};
  r.checks["certificate"] = margin >= -kCertTol;
  r.checks["gamma_decreasing"] = g1 > g2 && g2 > g3;
  r.holds = std::isfinite(M) && r.checks["certificate"];
  return r;
}

ConditionReport check_energy_inequality(const Trajectory& traj, double tol)
{
  RequireSteps(traj, 1);
  ConditionReport r;
  r.condition = "energy_inequality";
  double worst = -kInf;
  for (size_t k = 1; k < traj.size(); ++k)
  {
    const double lhs = traj.energies[k].psi_step + traj.energies[k].phi;
    const double rhs = traj.energies[k - 1].phi + traj.work[k];
    worst = std::max(worst, lhs - rhs);
  }
  r.samples = static_cast<int>(traj.size() - 1);
  r.margin = tol - worst;
  r.constants = {{"tol", tol}, {"max_excess", worst}};
  r.holds = worst <= tol;
  return r;
}

ConditionReport check_zeta_monotone(const Trajectory& traj,
                                    const ProblemSpec& spec,
                                    std::optional<double> C,
                                    std::optional<double> M2)
{
  spec.validate();
  RequireSteps(traj, 1);
  const double pd = dual_exponent(spec.p);
  const double a = lp_norm_pow(spec.f, pd) + 1.0;
  const double w = std::pow(spec.lambda, pd) * M2.value_or(0.0);
  const size_t n = traj.size();
  std::vector<double> integral(n, 0.0);
  for (size_t k = 1; k < n; ++k)
  {
    const double h = traj.times[k] - traj.times[k - 1];
    const auto& e0 = traj.energies[k - 1];
    const auto& e1 = traj.energies[k];
    integral[k] = integral[k - 1] +
                  0.5 * h * (e0.phi + e0.lp_norm_p + e1.phi + e1.lp_norm_p);
  }
  double c = 0.0;
  const bool fitted = !C.has_value();
  if (fitted)
  {
    for (size_t k = 1; k < n; ++k)
    {
      const double h = traj.times[k] - traj.times[k - 1];
      const double rise = traj.energies[k].phi - traj.energies[k - 1].phi -
                          w * (integral[k] - integral[k - 1]);
      c = std::max(c, rise / (h * a));
    }
  }
  else
  {
    c = *C;
  }
  auto zeta = [&](size_t k) {
    return traj.energies[k].phi - c * traj.times[k] * a - w * integral[k];
  };
  double margin = kInf;
  for (size_t k = 1; k < n; ++k)
  {
    const double drop = zeta(k - 1) - zeta(k);
    margin = std::min(margin, drop / std::max(1.0, std::fabs(traj.energies[k].phi)));
  }
  ConditionReport r;
  r.condition = "zeta_monotone";
  r.samples = static_cast<int>(n - 1);
  r.margin = margin;
  r.constants = {{"C", c}, {"M2", M2.value_or(0.0)}};
  r.checks["fitted_C"] = fitted;
  r.holds = margin >= -kCertTol;
  return r;
}

DissipationFit fit_dissipation(const Trajectory& traj, double sigma_w)
{
  RequireSteps(traj, 4);
  if (!(sigma_w > 0.0) || !std::isfinite(sigma_w))
  {
    throw PreconditionError("sigma_w must be positive");
  }
  const size_t n = traj.size();
  std::vector<double> lyap(n);
  for (size_t k = 0; k < n; ++k)
  {
    lyap[k] = traj.energies[k].phi + sigma_w * traj.energies[k].lp_norm_p;
    if (!std::isfinite(lyap[k]))
    {
      throw FitFailure("no absorbing estimate: Lyapunov value is not finite");
    }
  }
  double h_min = kInf;
  for (size_t k = 1; k < n; ++k)
  {
    h_min = std::min(h_min, traj.times[k] - traj.times[k - 1]);
  }
  const size_t steps = n - 1;
  const size_t tail = std::max<size_t>(1, steps / 4);

  struct Eval
  {
    bool ok = false;
    double F = 0.0;
    double residual = 0.0;
  };
  // Exact-integrator rates: if d/dt Phi + beta Phi <= F on a step, then
  // v_k <= F. Violations are rates above the steady tail level.
  auto evaluate = [&](double beta) {
    std::vector<double> v(steps), tol(steps);
    for (size_t k = 1; k <= steps; ++k)
    {
      const double h = traj.times[k] - traj.times[k - 1];
      const double decay = std::exp(-beta * h);
      const double den = -std::expm1(-beta * h);
      v[k - 1] = beta * (lyap[k] - decay * lyap[k - 1]) / den;
      tol[k - 1] =
          1e-12 * beta * (std::fabs(lyap[k]) + std::fabs(lyap[k - 1])) / den;
    }
    double mean = 0.0;
    for (size_t k = steps - tail; k < steps; ++k)
    {
      mean += v[k];
    }
    mean /= static_cast<double>(tail);
    Eval e;
    e.F = std::max(0.0, mean);
    e.ok = true;
    for (size_t k = 0; k < steps; ++k)
    {
      if (v[k] > e.F + 1e-6 * e.F + tol[k])
      {
        e.ok = false;
        break;
      }
    }
    double ss = 0.0;
    for (size_t k = steps - tail; k < steps; ++k)
    {
      ss += (v[k] - e.F) * (v[k] - e.F);
    }
    e.residual = std::sqrt(ss / static_cast<double>(tail)) / std::max(1.0, e.F);
    return e;
  };

  const double t_end = traj.times.back() - traj.times.front();
  const double beta_min = 1e-3 / t_end;
  const double beta_max = 20.0 / h_min;
  double lo = 0.0;
  double hi = 0.0;
  for (double beta = beta_min; beta <= beta_max * (1 + 1e-12); beta *= 2.0)
  {
    if (evaluate(beta).ok)
    {
      lo = beta;
      hi = 0.0;
    }
    else if (lo > 0.0 && hi == 0.0)
    {
      hi = beta;
    }
  }
  if (lo == 0.0)
  {
    throw FitFailure("no absorbing estimate: Lyapunov value is not dissipative");
  }
  if (hi > 0.0)
  {
    for (int it = 0; it < 80 && hi - lo > 1e-13 * hi; ++it)
    {
      const double mid = 0.5 * (lo + hi);
      (evaluate(mid).ok ? lo : hi) = mid;
    }
  }
  const Eval best = evaluate(lo);
  DissipationFit fit;
  fit.beta = lo;
  fit.F = best.F;
  fit.sigma_w = sigma_w;
  fit.R = fit.F / (sigma_w * fit.beta) + 1.0 / sigma_w;
  fit.T0_coeff = 1.0 / fit.beta;
  fit.fit_residual = best.residual;
  return fit;
}

std::string to_json(const ConditionReport& report)
{
  return ReportJson(report).dump(2);
}

std::string to_json(const DissipationFit& fit)
{
  nlohmann::json j;
  j["beta"] = Number(fit.beta);
  j["F"] = Number(fit.F);
  j["R"] = Number(fit.R);
  j["T0_coeff"] = Number(fit.T0_coeff);
  j["fit_residual"] = Number(fit.fit_residual);
  j["sigma_w"] = Number(fit.sigma_w);
  return j.dump(2);
}

std::string to_json(const std::vector<ConditionReport>& reports)
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports)
  {
    j.push_back(ReportJson(r));
  }
  return j.dump(2);
}

}  // namespace dnflow
