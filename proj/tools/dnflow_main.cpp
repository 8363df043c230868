#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "dnflow/dnflow.h"

namespace
{
int Report(dnflow_status status, const char* what)
{
  std::fprintf(stderr, "dnflow: %s: %s\n", what, dnflow_last_error());
  return static_cast<int>(status) <= 5 ? static_cast<int>(status) : 1;
}
}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Minimizing-movement solver for doubly nonlinear evolution inclusions"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("command", command, "integrate | diagnose | bundle | sweep | omega")
      ->required()
      ->check(CLI::IsMember({"integrate", "diagnose", "bundle", "sweep", "omega"}));
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "random seed (overrides output.seed)");
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  dnflow_config* cfg = nullptr;
  dnflow_status s = dnflow_config_load(config_path.c_str(), &cfg);
  if (s != DNFLOW_OK)
  {
    return Report(s, "config");
  }
  s = dnflow_config_set_command(cfg, command.c_str());
  if (s == DNFLOW_OK && !out_dir.empty())
  {
    s = dnflow_config_set_directory(cfg, out_dir.c_str());
  }
  if (s == DNFLOW_OK && seed_opt->count() > 0)
  {
    s = dnflow_config_set_seed(cfg, seed);
  }
  if (s != DNFLOW_OK)
  {
    dnflow_config_free(cfg);
    return Report(s, "config");
  }

  int exit_code = 0;
  char* run_dir = nullptr;
  s = dnflow_run(cfg, &exit_code, &run_dir);
  dnflow_config_free(cfg);
  if (s != DNFLOW_OK)
  {
    std::fprintf(stderr, "dnflow: %s: %s\n", command.c_str(), dnflow_last_error());
  }
  if (run_dir != nullptr)
  {
    std::printf("%s\n", run_dir);
    dnflow_string_free(run_dir);
  }
  return exit_code;
}
