#include "dnflow/grid.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "dnflow/error.hpp"
#include "dnflow/power.hpp"

namespace dnflow
{
namespace
{
void RequireSameGrid(const GridFunction& a, const GridFunction& b)
{
  if (!(a.grid() == b.grid()))
  {
    throw PreconditionError("grid functions live on different grids");
  }
}

void RequireFinite(const std::vector<double>& values)
{
  for (double v : values)
  {
    if (!std::isfinite(v))
    {
      throw DomainError("grid function has a non-finite entry");
    }
  }
}
}  // namespace

Grid1D::Grid1D(int n, double length) : n_(n), length_(length)
{
  if (n < 1)
  {
    throw PreconditionError("grid needs at least one interior node");
  }
  if (!(length > 0.0) || !std::isfinite(length))
  {
    throw PreconditionError("domain length must be positive and finite");
  }
}

GridFunction::GridFunction(const Grid1D& grid)
    : grid_(grid), values_(static_cast<size_t>(grid.n()), 0.0)
{
}

GridFunction::GridFunction(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
  if (values_.size() != static_cast<size_t>(grid.n()))
  {
    throw PreconditionError("grid function length " +
                            std::to_string(values_.size()) +
                            " does not match grid size " +
                            std::to_string(grid.n()));
  }
  RequireFinite(values_);
}

GridFunction GridFunction::Sample(const Grid1D& grid,
                                  const std::function<double(double)>& f)
{
  std::vector<double> v(static_cast<size_t>(grid.n()));
  for (int i = 0; i < grid.n(); ++i)
  {
    v[static_cast<size_t>(i)] = f(grid.node(i));
  }
  return GridFunction(grid, std::move(v));
}

GridFunction& GridFunction::operator+=(const GridFunction& other)
{
  RequireSameGrid(*this, other);
  for (size_t i = 0; i < values_.size(); ++i)
  {
    values_[i] += other.values_[i];
  }
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other)
{
  RequireSameGrid(*this, other);
  for (size_t i = 0; i < values_.size(); ++i)
  {
    values_[i] -= other.values_[i];
  }
  return *this;
}

GridFunction& GridFunction::operator*=(double s)
{
  for (double& v : values_)
  {
    v *= s;
  }
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b)
{
  a += b;
  return a;
}

GridFunction operator-(GridFunction a, const GridFunction& b)
{
  a -= b;
  return a;
}

GridFunction operator*(double s, GridFunction a)
{
  a *= s;
  return a;
}

double weighted_dot(const GridFunction& u, const GridFunction& v)
{
  RequireSameGrid(u, v);
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i)
  {
    sum += u[i] * v[i];
  }
  return u.grid().h() * sum;
}

double lp_norm_pow(const GridFunction& u, double p)
{
  double sum = 0.0;
  for (double v : u.values())
  {
    sum += pow_abs(v, p);
  }
  return u.grid().h() * sum;
}

double lp_norm(const GridFunction& u, double p)
{
  if (!(p >= 1.0))
  {
    throw PreconditionError("lp_norm needs p >= 1");
  }
  const double s = lp_norm_pow(u, p);
  if (p == 2.0)
  {
    return std::sqrt(s);
  }
  return std::pow(s, 1.0 / p);
}

double m_dirichlet_energy(const GridFunction& u, double m)
{
  if (!(m > 1.0))
  {
    throw PreconditionError("m-Dirichlet energy needs m > 1");
  }
  const double h = u.grid().h();
  const int n = u.size();
  double sum = 0.0;
  double left = 0.0;
  for (int i = 0; i <= n; ++i)
  {
    const double right = (i < n) ? u[i] : 0.0;
    sum += pow_abs((right - left) / h, m);
    left = right;
  }
  return h * sum / m;
}

GridFunction m_laplacian(const GridFunction& u, double m)
{
  if (!(m > 1.0))
  {
    throw PreconditionError("m-Laplacian needs m > 1");
  }
  const double h = u.grid().h();
  const int n = u.size();
  GridFunction out(u.grid());
  double left_flux = alpha_apply(u[0] / h, m);
  for (int i = 0; i < n; ++i)
  {
    const double next = (i + 1 < n) ? u[i + 1] : 0.0;
    const double right_flux = alpha_apply((next - u[i]) / h, m);
    out[i] = (right_flux - left_flux) / h;
    left_flux = right_flux;
  }
  return out;
}

GridFunction backward_difference(const GridFunction& u)
{
  const double h = u.grid().h();
  GridFunction out(u.grid());
  double prev = 0.0;
  for (int i = 0; i < u.size(); ++i)
  {
    out[i] = (u[i] - prev) / h;
    prev = u[i];
  }
  return out;
}

double metric_dX(const GridFunction& u, double phi_u, const GridFunction& v,
                 double phi_v, double p)
{
  if (!std::isfinite(phi_u) || !std::isfinite(phi_v))
  {
    throw DomainError("d_X needs both states inside the energy domain");
  }
  RequireSameGrid(u, v);
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i)
  {
    sum += pow_abs(u[i] - v[i], p);
  }
  sum *= u.grid().h();
  const double norm = (p == 2.0) ? std::sqrt(sum) : std::pow(sum, 1.0 / p);
  return norm + std::fabs(phi_u - phi_v);
}

double metric_dX(const GridFunction& u, const GridFunction& v,
                 const std::function<double(const GridFunction&)>& phi,
                 double p)
{
  return metric_dX(u, phi(u), v, phi(v), p);
}

double dirichlet_principal_eigenvalue(const Grid1D& grid)
{
  const double h = grid.h();
  const double s = std::sin(std::numbers::pi / (2.0 * (grid.n() + 1)));
  return 4.0 / (h * h) * s * s;
}

GridFunction dirichlet_principal_eigenvector(const Grid1D& grid)
{
  const double L = grid.length();
  return GridFunction::Sample(
      grid, [L](double x) { return std::sin(std::numbers::pi * x / L); });
}

void write_state_row(std::ostream& os, double t, const GridFunction& u)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  os << buf;
  for (double v : u.values())
  {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << ',' << buf;
  }
  os << '\n';
}

}  // namespace dnflow
