#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "dnflow/app.hpp"
#include "dnflow/io.hpp"
#include "json.hpp"
#include "tempdir.hpp"

using namespace dnflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
RunConfig Config(const std::string& text, const fixture::TempDir& dir, const std::string& run_id,
                 std::vector<std::string>* defaults = nullptr)
{
  RunConfig c = parse_config(text, defaults);
  c.directory = dir.str();
  c.run_id = run_id;
  return c;
}

json ReadJson(const fs::path& p) { return json::parse(fixture::Slurp(p)); }

std::vector<std::vector<double>> ReadCsv(const fs::path& p)
{
  std::istringstream in(fixture::Slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line))
  {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
      row.push_back(std::stod(cell));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string ExpectIoError(const std::string& run_dir)
{
  try
  {
    emit_plot_script(run_dir);
  }
  catch (const IoError& e)
  {
    return e.what();
  }
  FAIL("expected IoError");
  return "";
}
}  // namespace

TEST_CASE("integrate writes trajectory and summary")
{
  fixture::TempDir dir;
  std::vector<std::string> defaults;
  const RunConfig cfg = Config(fixture::HeatConfigText("integrate", 1.0), dir, "heat", &defaults);
  const RunResult r = run_command(cfg, defaults);
  REQUIRE(r.exit_code == kExitOk);
  const fs::path run = dir.path() / "heat";
  for (const char* name : {"trajectory.csv", "energy.csv", "final_state.csv",
                           "dissipation.json", "summary.json", "plot.gp"})
  {
    CAPTURE(name);
    CHECK(fs::exists(run / name));
  }
  const json s = ReadJson(run / "summary.json");
  CHECK(s.at("steps") == 100);
  CHECK(s.at("exit_code") == 0);
  CHECK(parse_config(s.at("config").get<std::string>()) == cfg);
  const auto applied = s.at("defaults_applied").get<std::vector<std::string>>();
  CHECK(std::count(applied.begin(), applied.end(), "grid.length") == 1);
  CHECK(ReadCsv(run / "trajectory.csv").size() == 101);
  CHECK(ReadCsv(run / "trajectory.csv")[0].size() == 32);

  // Heat decays monotonically, which is what plot.gp renders.
  const auto energy = ReadCsv(run / "energy.csv");
  for (std::size_t k = 1; k < energy.size(); ++k)
  {
    CHECK(energy[k][4] <= energy[k - 1][4]);
  }
  const std::string script = fixture::Slurp(run / "plot.gp");
  CHECK(script.find("'energy.csv' using 1:5") != std::string::npos);
  CHECK(script.find("bound(t) = F/beta + L0*exp(-beta*t)") != std::string::npos);
  CHECK(script.find(dir.str()) == std::string::npos);

  // Run directories are append-only.
  const std::string before = fixture::Slurp(run / "summary.json");
  const RunResult again = run_command(cfg, defaults);
  CHECK(again.exit_code == kExitIo);
  CHECK(fixture::Slurp(run / "summary.json") == before);
}

TEST_CASE("identical config and seed give byte-identical CSVs")
{
  fixture::TempDir dir;
  const std::string text = fixture::DoubleWellConfigText("bundle", 15, 1.0, "count = 5\n");
  for (const char* id : {"a", "b"})
  {
    RunConfig cfg = Config(text, dir, id);
    cfg.seed = 77;
    REQUIRE(run_command(cfg).exit_code == kExitOk);
  }
  CHECK(fixture::Slurp(dir.path() / "a" / "bundle_energy.csv") ==
        fixture::Slurp(dir.path() / "b" / "bundle_energy.csv"));

  RunConfig other = Config(text, dir, "c");
  other.seed = 78;
  REQUIRE(run_command(other).exit_code == kExitOk);
  CHECK(fixture::Slurp(dir.path() / "a" / "bundle_energy.csv") !=
        fixture::Slurp(dir.path() / "c" / "bundle_energy.csv"));

  for (const char* id : {"d", "e"})
  {
    RunConfig cfg = Config(fixture::HeatConfigText("integrate", 0.5), dir, id);
    cfg.seed = 3;
    REQUIRE(run_command(cfg).exit_code == kExitOk);
  }
  for (const char* name : {"trajectory.csv", "energy.csv", "final_state.csv"})
  {
    CHECK(fixture::Slurp(dir.path() / "d" / name) == fixture::Slurp(dir.path() / "e" / name));
  }
}

TEST_CASE("diagnose on the double well")
{
  fixture::TempDir dir;
  const RunConfig cfg =
      Config(fixture::DoubleWellConfigText("diagnose", 31, 3.0, "samples = 256\n"), dir, "dw");
  const RunResult r = run_command(cfg);
  CHECK(r.exit_code == kExitOk);
  const json j = ReadJson(dir.path() / "dw" / "conditions.json");
  CHECK(j.at("classification") == "attractor for all λ");
  CHECK(j.at("failed").empty());
  CHECK(j.at("reports").size() == 7);
}

TEST_CASE("diagnose reports a failed condition")
{
  fixture::TempDir dir;
  // j = r^2/2 cannot absorb a quartic perturbation.
  const std::string text = fixture::HeatConfigText(
      "diagnose", 0.2,
      "sigma = 2\npotential = power\nperturbation = power\nkappa = 0.1\nq = 4\n"
      "initial_amplitude = 0.1\n",
      "samples = 256\n");
  std::string fixed = text;
  fixed.replace(fixed.find("potential = zero\n"), 17, "");
  fixed.replace(fixed.find("lambda = 0"), 10, "lambda = 1");
  const RunResult r = run_command(Config(fixed, dir, "bad"));
  CHECK(r.exit_code == kExitCondition);
  const json j = ReadJson(dir.path() / "bad" / "conditions.json");
  CHECK(j.at("classification") == "no guarantee");
  CHECK_FALSE(j.at("failed").empty());
  CHECK(fs::exists(dir.path() / "bad" / "summary.json"));
}

TEST_CASE("sweep brackets the principal eigenvalue")
{
  fixture::TempDir dir;
  const RunConfig cfg = Config(
      fixture::HeatConfigText("sweep", 12.0, "perturbation = linear\nkappa = 1\n"), dir, "sw");
  const RunResult r = run_command(cfg);
  CHECK(r.exit_code == kExitOk);
  const json j = ReadJson(dir.path() / "sw" / "sweep.json");
  const double h = 1.0 / 32.0;
  const double lam1 = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
  CHECK(j.at("lambda1").get<double>() == doctest::Approx(lam1).epsilon(1e-12));
  CHECK(j.at("threshold_lo").get<double>() <= lam1);
  CHECK(j.at("threshold_hi").get<double>() >= lam1);
  CHECK(j.at("threshold_hi").get<double>() - j.at("threshold_lo").get<double>() <=
        0.1 * lam1 * (1 + 1e-12));
  const auto rows = ReadCsv(dir.path() / "sw" / "sweep.csv");
  CHECK(rows.size() == 5);
  CHECK(rows.back()[2] == 0.0);
  const std::string script = fixture::Slurp(dir.path() / "sw" / "plot.gp");
  CHECK(script.find("lambda1 = " + format_real(j.at("lambda1").get<double>())) !=
        std::string::npos);
  CHECK(script.find("set arrow from lambda1") != std::string::npos);
}

TEST_CASE("omega writes representatives and the attraction curve")
{
  fixture::TempDir dir;
  const RunConfig cfg = Config(
      fixture::DoubleWellConfigText("omega", 31, 12.0, "count = 8\nt_tail = 9\n"), dir, "om");
  REQUIRE(run_command(cfg).exit_code == kExitOk);
  const json s = ReadJson(dir.path() / "om" / "omega_summary.json");
  CHECK(s.at("representatives") == 2);
  CHECK(s.at("final_distance").get<double>() < 0.05);
  const auto curve = ReadCsv(dir.path() / "om" / "attraction.csv");
  CHECK(curve.size() == 101);
  CHECK(curve.front()[0] == 0.0);
  CHECK(curve.back()[0] == 12.0);
  CHECK(ReadCsv(dir.path() / "om" / "omega_states.csv").size() == 2);
}

TEST_CASE("solver failure exits with the solver code and an error record")
{
  fixture::TempDir dir;
  RunConfig cfg = Config(fixture::HeatConfigText("integrate", 0.1), dir, "fail");
  cfg.p = 4.0;
  cfg.solver_max_iter = 1;
  cfg.solver_tol = 1e-14;
  const RunResult r = run_command(cfg);
  CHECK(r.exit_code == kExitSolver);
  const json e = ReadJson(dir.path() / "fail" / "error.json");
  CHECK(e.at("exit_code") == kExitSolver);
  CHECK(e.contains("failed_step"));
  CHECK_FALSE(fs::exists(dir.path() / "fail" / "summary.json"));
  CHECK(run_command(cfg).exit_code == kExitIo);
}

TEST_CASE("plot script needs its artifacts")
{
  fixture::TempDir dir;
  const std::string empty = ExpectIoError(dir.str());
  CHECK(empty.find("energy.csv") != std::string::npos);
  CHECK(empty.find("sweep.csv") != std::string::npos);

  fixture::Spit(dir.path() / "energy.csv", "t,phi\n");
  const std::string partial = ExpectIoError(dir.str());
  CHECK(partial.find("missing artifacts") != std::string::npos);
  CHECK(partial.find("dissipation.json") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path() / "plot.gp"));
}

TEST_CASE("atomic writes")
{
  fixture::TempDir dir;
  const fs::path target = dir.path() / "a.txt";
  write_file_atomic(target, "one");
  write_file_atomic(target, "two");
  CHECK(read_file(target) == "two");
  CHECK_FALSE(fs::exists(dir.path() / "a.txt.tmp"));
  CHECK_THROWS_AS(write_file_atomic(dir.path() / "missing" / "b.txt", "x"), IoError);
  CHECK_THROWS_AS(read_file(dir.path() / "none"), IoError);
  CHECK(format_real(0.1) == "0.1");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_real(-INFINITY) == "-inf");
  CHECK(exit_code_for(ErrorCode::Parse) == kExitParse);
  CHECK(exit_code_for(ErrorCode::Fit) == kExitOther);
}
