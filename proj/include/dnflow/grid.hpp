#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace dnflow
{
/// Uniform grid on (0, L) with n interior nodes x_i = i*h, i = 1..n, and
/// homogeneous Dirichlet data at x = 0 and x = L.
class Grid1D
{
public:
  Grid1D(int n, double length);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double h() const noexcept { return length_ / (n_ + 1); }

  /// Coordinate of interior node i, 0-based (i.e. x_{i+1}).
  double node(int i) const noexcept { return (i + 1) * h(); }

  bool operator==(const Grid1D&) const = default;

private:
  int n_;
  double length_;
};

/// Nodal values on the interior nodes of a grid. Entries are finite.
class GridFunction
{
public:
  explicit GridFunction(const Grid1D& grid);
  GridFunction(const Grid1D& grid, std::vector<double> values);

  /// Samples `f` at the interior nodes.
  static GridFunction Sample(const Grid1D& grid,
                             const std::function<double(double)>& f);

  const Grid1D& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.n(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  double operator[](int i) const { return values_[static_cast<size_t>(i)]; }
  double& operator[](int i) { return values_[static_cast<size_t>(i)]; }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

  bool operator==(const GridFunction&) const = default;

private:
  Grid1D grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Weighted inner product sum_i h u_i v_i.
double weighted_dot(const GridFunction& u, const GridFunction& v);

/// (sum_i h |u_i|^p)^(1/p).
double lp_norm(const GridFunction& u, double p);

/// sum_i h |u_i|^p, the p-th power of lp_norm.
double lp_norm_pow(const GridFunction& u, double p);

/// (h/m) sum_{i=0..n} |(u_{i+1} - u_i)/h|^m with zero boundary padding.
double m_dirichlet_energy(const GridFunction& u, double m);

/// Flux-form m-Laplacian (F_{i+1/2} - F_{i-1/2})/h with
/// F_{i+1/2} = |Du|^{m-2} Du. Its negation is the weighted gradient of
/// m_dirichlet_energy.
GridFunction m_laplacian(const GridFunction& u, double m);

/// Backward differences (u_i - u_{i-1})/h with u_0 = 0.
GridFunction backward_difference(const GridFunction& u);

/// |u - v|_{L^p} + |phi(u) - phi(v)|. Throws DomainError when either energy
/// is infinite.
double metric_dX(const GridFunction& u, const GridFunction& v,
                 const std::function<double(const GridFunction&)>& phi,
                 double p);

/// Same metric with energies already evaluated.
double metric_dX(const GridFunction& u, double phi_u, const GridFunction& v,
                 double phi_v, double p);

/// Smallest eigenvalue of the 3-point Dirichlet Laplacian,
/// (4/h^2) sin^2(pi/(2(n+1))).
double dirichlet_principal_eigenvalue(const Grid1D& grid);

/// Discrete principal eigenvector sin(pi x_i / L) (max-norm 1 for odd n).
GridFunction dirichlet_principal_eigenvector(const Grid1D& grid);

/// Writes "t,u_1,...,u_n\n" with round-trip precision.
void write_state_row(std::ostream& os, double t, const GridFunction& u);

}  // namespace dnflow
