#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnflow/attractor.hpp"
#include "dnflow/stepper.hpp"

namespace dnflow
{
/// Batch run configuration. Text form is sectioned `key = value` with
/// sections [problem] [grid] [time] [command] [output]; `#` starts a comment.
struct RunConfig
{
  // [problem]
  double p = 2.0;
  double m = 2.0;
  double sigma = 2.0;
  std::string potential = "zero";  // zero | power | indicator
  double potential_scale = 1.0;
  double potential_lower = -1.0;
  double potential_upper = 1.0;
  std::string perturbation = "none";  // none | linear | cubic_well | modulated
                                      // | power | gradient_linear | gradient_power
  double kappa = 0.0;
  int perturbation_mode = 1;
  double q = 2.0;
  double q1 = 2.0;
  double q2 = 2.0;
  double lambda = 0.0;
  std::string forcing = "zero";  // zero | constant | sine
  double forcing_value = 0.0;    // constant c or sine amplitude a
  int forcing_mode = 1;          // sine mode k
  int dimension = 1;
  std::string initial = "random_fourier";  // zero | eigen | random_fourier
  double initial_amplitude = 1.0;

  // [grid]
  int n = 31;
  double length = 1.0;

  // [time]
  double h_t = 1e-2;
  double T = 1.0;
  std::string mode = "semi_implicit";  // semi_implicit | fixed_point
  double solver_tol = 1e-10;
  int solver_max_iter = 200000;
  double fp_tol = 1e-12;
  int fp_max_iter = 100;

  // [command]
  std::string command = "integrate";  // integrate | diagnose | bundle | sweep | omega
  int count = 16;
  double t_tail = -1.0;  // negative: 3/4 of the horizon
  double cluster_eps = 0.05;
  double sigma_w = 1.0;
  double eps = 0.1;
  int samples = 1024;
  std::vector<double> sweep_values = {0.8, 0.9, 1.0, 1.1, 1.2};
  bool sweep_relative = true;  // values are multiples of the discrete lambda_1
  double cap = 1e6;

  // [output]
  std::string directory = "out";
  std::string run_id = "run";
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown sections or keys, duplicates, missing required keys
/// and out-of-range values throw ParseError with the line and key path.
/// Keys left at their defaults are appended to `defaults` as "section.key".
RunConfig parse_config(const std::string& text,
                       std::vector<std::string>* defaults = nullptr);

/// Reads and parses a file; IoError when it cannot be read.
RunConfig load_config(const std::string& path,
                      std::vector<std::string>* defaults = nullptr);

/// Canonical text with every key written; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& cfg);

ProblemSpec make_spec(const RunConfig& cfg);

InitialRule make_initial_rule(const RunConfig& cfg);

}  // namespace dnflow
