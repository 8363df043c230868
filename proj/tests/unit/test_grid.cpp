#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dnflow/error.hpp"
#include "dnflow/grid.hpp"
#include "oracles.hpp"

using namespace dnflow;

namespace
{
GridFunction Tent(const Grid1D& g)
{
  const double L = g.length();
  return GridFunction::Sample(g, [L](double x) { return std::min(x, L - x); });
}

// m-Dirichlet energy written directly from its definition.
double OracleEnergy(const std::vector<double>& u, double h, double m)
{
  double s = 0.0;
  for (size_t i = 0; i <= u.size(); ++i)
  {
    const double right = i < u.size() ? u[i] : 0.0;
    const double left = i > 0 ? u[i - 1] : 0.0;
    s += std::pow(std::fabs((right - left) / h), m);
  }
  return h * s / m;
}
}  // namespace

TEST_CASE("grid geometry")
{
  const Grid1D g(9, 2.0);
  CHECK(g.h() == doctest::Approx(0.2));
  CHECK(g.node(0) == doctest::Approx(0.2));
  CHECK(g.node(8) == doctest::Approx(1.8));
  CHECK_THROWS_AS(Grid1D(0, 1.0), PreconditionError);
  CHECK_THROWS_AS(Grid1D(3, -1.0), PreconditionError);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(3, 0.0)), PreconditionError);
  std::vector<double> bad(9, 0.0);
  bad[4] = std::nan("");
  CHECK_THROWS_AS(GridFunction(g, bad), DomainError);
}

TEST_CASE("lp_norm examples")
{
  const Grid1D g(15, 1.0);
  CHECK(lp_norm(GridFunction(g), 2.0) == 0.0);
  const GridFunction c = GridFunction::Sample(g, [](double) { return -3.0; });
  CHECK(lp_norm(c, 3.0) == doctest::Approx(3.0 * std::cbrt(15 * g.h())));
  const Grid1D fine(999, 1.0);
  const GridFunction s =
      GridFunction::Sample(fine, [](double x) { return std::sin(std::numbers::pi * x); });
  CHECK(std::fabs(lp_norm(s, 2.0) - std::sqrt(0.5)) < 1e-4);
  CHECK_THROWS_AS(lp_norm(s, 0.5), PreconditionError);
}

TEST_CASE("lp_norm triangle inequality")
{
  oracle::Rng rng(1);
  const Grid1D g(20, 1.5);
  for (int k = 0; k < 300; ++k)
  {
    const double p = rng.uniform(1.0, 6.0);
    const GridFunction a(g, rng.vector(20, -2, 2));
    const GridFunction b(g, rng.vector(20, -2, 2));
    CHECK(lp_norm(a + b, p) <= (lp_norm(a, p) + lp_norm(b, p)) * (1 + 1e-13));
  }
}

TEST_CASE("m_dirichlet_energy examples")
{
  const Grid1D g(9, 1.0);
  CHECK(m_dirichlet_energy(GridFunction(g), 2.0) == 0.0);
  CHECK(m_dirichlet_energy(Tent(g), 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m_dirichlet_energy(Tent(g), 4.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(m_dirichlet_energy(Tent(g), 1.0), PreconditionError);
}

TEST_CASE("m_dirichlet_energy midpoint convexity")
{
  oracle::Rng rng(2);
  const Grid1D g(25, 1.0);
  for (int k = 0; k < 300; ++k)
  {
    const double m = rng.uniform(1.2, 5.0);
    const GridFunction a(g, rng.vector(25, -1, 1));
    const GridFunction b(g, rng.vector(25, -1, 1));
    const double mid = m_dirichlet_energy(0.5 * (a + b), m);
    const double avg = 0.5 * (m_dirichlet_energy(a, m) + m_dirichlet_energy(b, m));
    CHECK(mid <= avg * (1 + 1e-13));
    CHECK(m_dirichlet_energy(a, m) ==
          doctest::Approx(OracleEnergy(a.vector(), g.h(), m)).epsilon(1e-12));
  }
}

TEST_CASE("m_laplacian examples")
{
  const Grid1D g(19, 1.0);
  const GridFunction quad = GridFunction::Sample(g, [](double x) { return x * (1 - x); });
  const GridFunction lap = m_laplacian(quad, 2.0);
  for (double v : lap.values())
  {
    CHECK(v == doctest::Approx(-2.0).epsilon(1e-10));
  }
  CHECK(m_laplacian(GridFunction(g), 3.0) == GridFunction(g));
}

TEST_CASE("negated weighted m_laplacian is the energy gradient")
{
  oracle::Rng rng(3);
  const Grid1D g(31, 1.0);
  for (double m : {2.0, 3.0, 4.0, 2.5})
  {
    const GridFunction u(g, rng.vector(31, -1, 1));
    const auto fd = oracle::central_difference(
        [&](const std::vector<double>& v) { return OracleEnergy(v, g.h(), m); },
        u.vector(), 1e-6);
    const GridFunction lap = m_laplacian(u, m);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 31; ++i)
    {
      num += std::pow(-g.h() * lap[i] - fd[i], 2);
      den += fd[i] * fd[i];
    }
    CHECK(std::sqrt(num / den) < 1e-6);
  }
}

TEST_CASE("summation by parts")
{
  oracle::Rng rng(4);
  const Grid1D g(17, 2.0);
  const double h = g.h();
  for (int k = 0; k < 200; ++k)
  {
    const double m = rng.uniform(1.5, 4.5);
    const GridFunction u(g, rng.vector(17, -3, 3));
    const GridFunction v(g, rng.vector(17, -3, 3));
    const double lhs = -weighted_dot(v, m_laplacian(u, m));
    double rhs = 0.0;
    for (int i = 0; i <= 17; ++i)
    {
      const double du = ((i < 17 ? u[i] : 0.0) - (i > 0 ? u[i - 1] : 0.0)) / h;
      const double dv = ((i < 17 ? v[i] : 0.0) - (i > 0 ? v[i - 1] : 0.0)) / h;
      rhs += h * std::pow(std::fabs(du), m - 2) * du * dv;
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("backward differences")
{
  const Grid1D g(7, 1.0);
  const GridFunction x = GridFunction::Sample(g, [](double t) { return t; });
  const GridFunction d = backward_difference(x);
  for (double v : d.values())
  {
    CHECK(v == doctest::Approx(1.0));
  }
}

TEST_CASE("metric_dX examples and properties")
{
  const Grid1D g(9, 1.0);
  auto energy = [](const GridFunction& u) { return m_dirichlet_energy(u, 2.0); };
  const GridFunction tent = Tent(g);
  CHECK(metric_dX(tent, tent, energy, 2.0) == 0.0);

  double tent_sq = 0.0;
  for (int i = 1; i <= 9; ++i)
  {
    const double x = i * 0.1;
    tent_sq += 0.1 * std::pow(std::min(x, 1 - x), 2);
  }
  CHECK(metric_dX(GridFunction(g), tent, energy, 2.0) ==
        doctest::Approx(std::sqrt(tent_sq) + 0.5).epsilon(1e-13));

  oracle::Rng rng(5);
  for (int k = 0; k < 100; ++k)
  {
    const GridFunction a(g, rng.vector(9, -1, 1));
    const GridFunction b(g, rng.vector(9, -1, 1));
    CHECK(metric_dX(a, b, energy, 3.0) == metric_dX(b, a, energy, 3.0));
    CHECK(metric_dX(a, b, energy, 3.0) > 0.0);
  }
  auto infinite = [](const GridFunction&) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(metric_dX(tent, tent, infinite, 2.0), DomainError);
}

TEST_CASE("principal eigenvalue")
{
  CHECK(dirichlet_principal_eigenvalue(Grid1D(1, 1.0)) == doctest::Approx(8.0).epsilon(1e-15));
  const Grid1D big(999, 1.0);
  const double oracle_value = oracle::smallest_dirichlet_eigenvalue(999, big.h(), 40);
  CHECK(dirichlet_principal_eigenvalue(big) == doctest::Approx(oracle_value).epsilon(1e-9));
  CHECK(std::fabs(dirichlet_principal_eigenvalue(big) - std::numbers::pi * std::numbers::pi) < 1e-4);

  double previous = 0.0;
  for (int n : {3, 7, 15, 31})
  {
    const Grid1D g(n, 1.0);
    const double lam = dirichlet_principal_eigenvalue(g);
    CHECK(lam == doctest::Approx(oracle::smallest_dirichlet_eigenvalue(n, g.h())).epsilon(1e-10));
    CHECK(lam > previous);
    CHECK(lam < std::numbers::pi * std::numbers::pi);
    previous = lam;
  }

  const Grid1D g(31, 2.5);
  const GridFunction e = dirichlet_principal_eigenvector(g);
  const GridFunction lap = m_laplacian(e, 2.0);
  const double lam = dirichlet_principal_eigenvalue(g);
  for (int i = 0; i < 31; ++i)
  {
    CHECK(-lap[i] == doctest::Approx(lam * e[i]).epsilon(1e-10));
  }
}

TEST_CASE("state rows round-trip")
{
  const Grid1D g(3, 1.0);
  const GridFunction u(g, {0.1, -1.0 / 3.0, 2e-300});
  std::ostringstream os;
  write_state_row(os, 0.25, u);
  std::istringstream is(os.str());
  std::string cell;
  std::vector<double> parsed;
  while (std::getline(is, cell, ','))
  {
    parsed.push_back(std::stod(cell));
  }
  REQUIRE(parsed.size() == 4);
  CHECK(parsed[0] == 0.25);
  CHECK(parsed[1] == 0.1);
  CHECK(parsed[2] == -1.0 / 3.0);
  CHECK(parsed[3] == 2e-300);
  CHECK(os.str().back() == '\n');
}
