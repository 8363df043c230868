#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "dnflow/config.hpp"
#include "oracles.hpp"

using namespace dnflow;

namespace
{
const char* const kMinimalHeat = R"(# heat equation
[problem]
p = 2
m = 2
potential = zero
lambda = 0
forcing = zero

[grid]
n = 31

[time]
h_t = 0.01
T = 1

[command]
name = integrate
)";

std::string Replace(std::string text, const std::string& from, const std::string& to)
{
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

ParseError ParseFailure(const std::string& text)
{
  try
  {
    parse_config(text);
  }
  catch (const ParseError& e)
  {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError(0, "", "");
}

RunConfig RandomConfig(oracle::Rng& rng)
{
  RunConfig c;
  c.p = rng.uniform(2.0, 5.0);
  c.m = rng.uniform(1.1, 4.0);
  const int pot = rng.integer(0, 2);
  c.potential = pot == 0 ? "zero" : pot == 1 ? "power" : "indicator";
  c.sigma = rng.uniform(1.1, 6.0);
  c.potential_scale = rng.uniform(0.1, 5.0);
  c.potential_lower = -rng.uniform(0.0, 2.0);
  c.potential_upper = rng.uniform(0.0, 2.0);
  const char* const fams[] = {"none", "linear", "cubic_well", "modulated", "power",
                              "gradient_linear", "gradient_power"};
  c.perturbation = fams[rng.integer(0, 6)];
  c.kappa = rng.uniform(0.0, 3.0);
  c.perturbation_mode = rng.integer(1, 5);
  c.q = rng.uniform(1.1, 4.0);
  c.q1 = rng.uniform(1.1, 4.0);
  c.q2 = rng.uniform(1.1, 4.0);
  c.lambda = rng.uniform(0.0, 1.0);
  const int f = rng.integer(0, 2);
  c.forcing = f == 0 ? "zero" : f == 1 ? "constant" : "sine";
  c.forcing_value = rng.uniform(-2.0, 2.0);
  c.forcing_mode = rng.integer(1, 4);
  c.dimension = rng.integer(1, 8);
  c.initial = rng.integer(0, 1) ? "eigen" : "random_fourier";
  c.initial_amplitude = rng.uniform(-3.0, 3.0);
  c.n = rng.integer(3, 200);
  c.length = rng.uniform(0.5, 4.0);
  c.h_t = rng.uniform(1e-4, 0.1);
  c.T = rng.uniform(0.5, 20.0);
  c.t_tail = rng.uniform(-1.0, 0.4) * c.T;
  c.mode = rng.integer(0, 1) ? "fixed_point" : "semi_implicit";
  c.solver_tol = rng.uniform(1e-12, 1e-8);
  c.count = rng.integer(1, 64);
  c.cluster_eps = rng.uniform(1e-3, 0.5);
  c.sigma_w = rng.uniform(0.1, 4.0);
  c.eps = rng.uniform(1e-3, 0.2);
  c.samples = rng.integer(16, 4096);
  c.sweep_values = {rng.uniform(0.1, 0.5), rng.uniform(0.6, 1.0), rng.uniform(1.1, 2.0)};
  c.sweep_relative = rng.integer(0, 1) == 1;
  c.cap = rng.uniform(2.0, 1e8);
  c.run_id = "r" + std::to_string(rng.integer(0, 1000));
  c.seed = static_cast<std::uint64_t>(rng.integer(0, 1 << 30)) << 33;
  return c;
}
}  // namespace

TEST_CASE("minimal heat config")
{
  std::vector<std::string> defaults;
  const RunConfig c = parse_config(kMinimalHeat, &defaults);
  CHECK(c.p == 2.0);
  CHECK(c.m == 2.0);
  CHECK(c.n == 31);
  CHECK(c.h_t == 0.01);
  CHECK(c.T == 1.0);
  CHECK(c.command == "integrate");
  CHECK(c.lambda == 0.0);
  CHECK(std::count(defaults.begin(), defaults.end(), "grid.length") == 1);
  CHECK(std::count(defaults.begin(), defaults.end(), "grid.n") == 0);
  CHECK(std::count(defaults.begin(), defaults.end(), "output.seed") == 1);

  const ProblemSpec s = make_spec(c);
  CHECK(s.grid.n() == 31);
  CHECK(s.pot.kind() == ConvexPotential::Kind::Zero);
  CHECK(s.fam.kind() == PerturbationFamily::Kind::None);
}

TEST_CASE("lambda outside the unit interval")
{
  const ParseError e = ParseFailure(Replace(kMinimalHeat, "lambda = 0", "lambda = 1.5"));
  CHECK(e.line() == 6);
  CHECK(e.key_path() == "problem.lambda");
  CHECK(std::string(e.what()).find("λ ∈ [0,1]") != std::string::npos);
}

TEST_CASE("misspelled key names its line")
{
  const ParseError e = ParseFailure(Replace(kMinimalHeat, "lambda = 0", "lamda = 0"));
  CHECK(e.line() == 6);
  CHECK(e.key_path() == "problem.lamda");
  CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
}

TEST_CASE("strict parsing errors")
{
  CHECK(ParseFailure(Replace(kMinimalHeat, "n = 31", "")).key_path() == "grid.n");
  CHECK(ParseFailure(Replace(kMinimalHeat, "[grid]", "[mesh]")).line() == 9);
  CHECK(ParseFailure(Replace(kMinimalHeat, "n = 31", "n = 31\nn = 32")).line() == 11);
  CHECK(ParseFailure(std::string("p = 2\n") + kMinimalHeat).line() == 1);
  CHECK(ParseFailure(Replace(kMinimalHeat, "h_t = 0.01", "h_t = -0.01")).key_path() == "time.h_t");
  CHECK(ParseFailure(Replace(kMinimalHeat, "h_t = 0.01", "h_t = 0.01x")).key_path() == "time.h_t");
  CHECK(ParseFailure(Replace(kMinimalHeat, "p = 2", "p = 1.5")).key_path() == "problem.p");
  CHECK(ParseFailure(Replace(kMinimalHeat, "name = integrate", "name = run")).line() == 17);
  CHECK(ParseFailure(Replace(kMinimalHeat, "n = 31", "n = 31.5")).key_path() == "grid.n");
  CHECK(ParseFailure(Replace(kMinimalHeat, "forcing = zero", "forcing = zero\nforcing_value = nan"))
            .key_path() == "problem.forcing_value");
  CHECK(ParseFailure(std::string(kMinimalHeat) + "t_tail = 1\n").key_path() == "command.t_tail");
  CHECK(ParseFailure(std::string(kMinimalHeat) + "eps = 0.25\n").key_path() == "command.eps");
  CHECK(ParseFailure(std::string(kMinimalHeat) + "sweep_values = 1, 0.5\n").key_path() ==
        "command.sweep_values");
  CHECK(ParseFailure(std::string(kMinimalHeat) + "[output]\nrun_id = a/b\n").key_path() ==
        "output.run_id");
  // sigma must agree with the power potential exponent once it is set.
  const std::string pot = Replace(kMinimalHeat, "potential = zero", "potential = power\nsigma = 3");
  CHECK_NOTHROW(parse_config(pot));
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), IoError);
}

TEST_CASE("render then parse is the identity")
{
  oracle::Rng rng(17);
  int checked = 0;
  for (int i = 0; i < 300; ++i)
  {
    const RunConfig c = RandomConfig(rng);
    // Keep only configs the parser accepts; the identity must hold for each.
    RunConfig parsed;
    try
    {
      parsed = parse_config(render_config(c));
    }
    catch (const ParseError&)
    {
      continue;
    }
    ++checked;
    CHECK(parsed == c);
    CHECK(render_config(parsed) == render_config(c));
  }
  CHECK(checked > 100);
}

TEST_CASE("forcing and initial rules")
{
  RunConfig c = parse_config(kMinimalHeat);
  c.forcing = "sine";
  c.forcing_value = 2.0;
  c.forcing_mode = 1;
  const ProblemSpec s = make_spec(c);
  const double mid = s.f[15];
  CHECK(mid == doctest::Approx(2.0));
  c.forcing = "constant";
  CHECK(make_spec(c).f[3] == 2.0);

  c.initial = "eigen";
  c.initial_amplitude = 0.5;
  const GridFunction u = make_initial_rule(c).sample(s.grid, 0);
  CHECK(u[15] == doctest::Approx(0.5 * dirichlet_principal_eigenvector(s.grid)[15]));
}
