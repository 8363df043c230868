#include "dnflow/dnflow.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "dnflow/app.hpp"
#include "dnflow/config.hpp"
#include "dnflow/diagnostics.hpp"
#include "dnflow/grid.hpp"

struct dnflow_config
{
  dnflow::RunConfig cfg;
  std::vector<std::string> defaults;
};

struct dnflow_trajectory
{
  dnflow::Trajectory traj;
};

namespace
{
thread_local std::string g_last_error;

dnflow_status Fail(dnflow_status s, const std::string& message)
{
  g_last_error = message;
  return s;
}

char* Duplicate(const std::string& s)
{
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr)
  {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
dnflow_status Guard(F&& body)
{
  try
  {
    g_last_error.clear();
    return body();
  }
  catch (const dnflow::Error& e)
  {
    return Fail(static_cast<dnflow_status>(e.code()), e.what());
  }
  catch (const std::bad_alloc&)
  {
    return Fail(DNFLOW_INTERNAL, "out of memory");
  }
  catch (const std::exception& e)
  {
    return Fail(DNFLOW_INTERNAL, e.what());
  }
}

dnflow_status NullArgument(const char* name)
{
  return Fail(DNFLOW_INVALID_ARGUMENT, std::string(name) + " must not be null");
}

void Overridden(dnflow_config* c, const std::string& path)
{
  auto& d = c->defaults;
  d.erase(std::remove(d.begin(), d.end(), path), d.end());
}

void Revalidate(dnflow_config* c, const dnflow::RunConfig& next)
{
  // Round-trip through the parser so overrides get the same checks as files.
  dnflow::parse_config(dnflow::render_config(next));
  c->cfg = next;
}
}  // namespace

extern "C" {

const char* dnflow_last_error(void) { return g_last_error.c_str(); }

void dnflow_string_free(char* s) { std::free(s); }

dnflow_status dnflow_config_parse(const char* text, dnflow_config** out)
{
  if (text == nullptr || out == nullptr)
  {
    return NullArgument("text and out");
  }
  return Guard([&] {
    auto c = std::make_unique<dnflow_config>();
    c->cfg = dnflow::parse_config(text, &c->defaults);
    *out = c.release();
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_config_load(const char* path, dnflow_config** out)
{
  if (path == nullptr || out == nullptr)
  {
    return NullArgument("path and out");
  }
  return Guard([&] {
    auto c = std::make_unique<dnflow_config>();
    c->cfg = dnflow::load_config(path, &c->defaults);
    *out = c.release();
    return DNFLOW_OK;
  });
}

void dnflow_config_free(dnflow_config* cfg) { delete cfg; }

dnflow_status dnflow_config_render(const dnflow_config* cfg, char** out)
{
  if (cfg == nullptr || out == nullptr)
  {
    return NullArgument("cfg and out");
  }
  return Guard([&] {
    *out = Duplicate(dnflow::render_config(cfg->cfg));
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_config_set_command(dnflow_config* cfg, const char* command)
{
  if (cfg == nullptr || command == nullptr)
  {
    return NullArgument("cfg and command");
  }
  return Guard([&] {
    dnflow::RunConfig next = cfg->cfg;
    next.command = command;
    Revalidate(cfg, next);
    Overridden(cfg, "command.name");
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_config_set_directory(dnflow_config* cfg, const char* directory)
{
  if (cfg == nullptr || directory == nullptr)
  {
    return NullArgument("cfg and directory");
  }
  return Guard([&] {
    dnflow::RunConfig next = cfg->cfg;
    next.directory = directory;
    Revalidate(cfg, next);
    Overridden(cfg, "output.directory");
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_config_set_seed(dnflow_config* cfg, uint64_t seed)
{
  if (cfg == nullptr)
  {
    return NullArgument("cfg");
  }
  cfg->cfg.seed = seed;
  Overridden(cfg, "output.seed");
  return DNFLOW_OK;
}

dnflow_status dnflow_run(const dnflow_config* cfg, int* exit_code, char** run_dir)
{
  if (cfg == nullptr || exit_code == nullptr)
  {
    return NullArgument("cfg and exit_code");
  }
  return Guard([&] {
    const dnflow::RunResult r = dnflow::run_command(cfg->cfg, cfg->defaults);
    *exit_code = r.exit_code;
    if (run_dir != nullptr)
    {
      *run_dir = Duplicate(r.run_dir);
    }
    if (r.exit_code != dnflow::kExitOk)
    {
      return Fail(static_cast<dnflow_status>(r.exit_code), r.message);
    }
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_integrate(const dnflow_config* cfg, dnflow_trajectory** out)
{
  if (cfg == nullptr || out == nullptr)
  {
    return NullArgument("cfg and out");
  }
  return Guard([&] {
    const dnflow::ProblemSpec spec = dnflow::make_spec(cfg->cfg);
    const dnflow::GridFunction u0 = dnflow::make_initial_rule(cfg->cfg).sample(spec.grid, 0);
    auto t = std::make_unique<dnflow_trajectory>();
    t->traj = dnflow::integrate(u0, cfg->cfg.T, spec);
    *out = t.release();
    return DNFLOW_OK;
  });
}

void dnflow_trajectory_free(dnflow_trajectory* traj) { delete traj; }

size_t dnflow_trajectory_levels(const dnflow_trajectory* traj)
{
  return traj == nullptr ? 0 : traj->traj.size();
}

size_t dnflow_trajectory_nodes(const dnflow_trajectory* traj)
{
  if (traj == nullptr || traj->traj.size() == 0)
  {
    return 0;
  }
  return static_cast<size_t>(traj->traj.states.front().grid().n());
}

dnflow_status dnflow_trajectory_state(const dnflow_trajectory* traj, size_t level,
                                      double* values, size_t len)
{
  if (traj == nullptr || values == nullptr)
  {
    return NullArgument("traj and values");
  }
  if (level >= traj->traj.size())
  {
    return Fail(DNFLOW_INVALID_ARGUMENT, "level out of range");
  }
  const std::vector<double>& u = traj->traj.states[level].vector();
  if (len != u.size())
  {
    return Fail(DNFLOW_INVALID_ARGUMENT,
                "buffer length must equal the node count " + std::to_string(u.size()));
  }
  std::copy(u.begin(), u.end(), values);
  return DNFLOW_OK;
}

dnflow_status dnflow_trajectory_energy(const dnflow_trajectory* traj, size_t level,
                                       double* t, double* phi, double* lp_norm_p)
{
  if (traj == nullptr)
  {
    return NullArgument("traj");
  }
  if (level >= traj->traj.size())
  {
    return Fail(DNFLOW_INVALID_ARGUMENT, "level out of range");
  }
  const dnflow::EnergyRecord& e = traj->traj.energies[level];
  if (t != nullptr)
  {
    *t = traj->traj.times[level];
  }
  if (phi != nullptr)
  {
    *phi = e.phi;
  }
  if (lp_norm_p != nullptr)
  {
    *lp_norm_p = e.lp_norm_p;
  }
  return DNFLOW_OK;
}

dnflow_status dnflow_principal_eigenvalue(int n, double length, double* out)
{
  if (out == nullptr)
  {
    return NullArgument("out");
  }
  return Guard([&] {
    *out = dnflow::dirichlet_principal_eigenvalue(dnflow::Grid1D(n, length));
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_classify_exponents(double p, double m, double sigma, double q, double q1,
                                        double q2, int N, int gradient, int single_valued_j,
                                        char** out)
{
  if (out == nullptr)
  {
    return NullArgument("out");
  }
  return Guard([&] {
    dnflow::ExponentSet e;
    e.p = p;
    e.m = m;
    e.sigma = sigma;
    e.q = q;
    e.q1 = q1;
    e.q2 = q2;
    e.N = N;
    e.gradient = gradient != 0;
    e.single_valued_j = single_valued_j != 0;
    *out = Duplicate(dnflow::classify_exponents(e).classification);
    return DNFLOW_OK;
  });
}

dnflow_status dnflow_emit_plot_script(const char* run_dir, char** path)
{
  if (run_dir == nullptr)
  {
    return NullArgument("run_dir");
  }
  return Guard([&] {
    const std::string p = dnflow::emit_plot_script(run_dir);
    if (path != nullptr)
    {
      *path = Duplicate(p);
    }
    return DNFLOW_OK;
  });
}

}  // extern "C"
