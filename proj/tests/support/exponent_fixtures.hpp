#pragma once

#include <string>
#include <vector>

#include "dnflow/diagnostics.hpp"

namespace fixture
{
struct ExponentCase
{
  std::string name;
  dnflow::ExponentSet e;
  std::string expected;
};

/// Hand-classified tuples, one or more per branch of the quasilinear and
/// gradient-perturbed exponent hypotheses.
inline std::vector<ExponentCase> ExponentTable()
{
  using dnflow::ExponentSet;
  auto quasi = [](double p, double m, double s, double q, int N) {
    ExponentSet e;
    e.p = p;
    e.m = m;
    e.sigma = s;
    e.q = q;
    e.N = N;
    return e;
  };
  auto grad = [](double p, double m, double s, double q1, double q2, int N) {
    ExponentSet e;
    e.p = p;
    e.m = m;
    e.sigma = s;
    e.q1 = q1;
    e.q2 = q2;
    e.N = N;
    e.gradient = true;
    return e;
  };
  const std::string all = dnflow::kAttractorAllLambda;
  const std::string small = dnflow::kAttractorSmallLambda;
  const std::string only = dnflow::kExistenceOnly;
  const std::string none = dnflow::kNoGuarantee;
  return {
      {"quartic j, q=2: p'(q-1)=2 < sigma=4", quasi(2, 2, 4, 2, 1), all},
      {"quadratic j, q=2: p'(q-1)=2 = max{m,sigma}", quasi(2, 2, 2, 2, 1), small},
      {"p=3 > max{m,sigma}=2", quasi(3, 2, 2, 2, 1), only},
      {"p'(q-1)=4 exceeds max{m,p} and sigma", quasi(2, 2, 2, 3, 1), none},
      {"sigma branch, sigma < m*: p'(q-1)=sigma allowed", quasi(2, 2, 6, 4, 1), small},
      {"sigma branch, sigma = m*: p'(q-1)=sigma rejected", quasi(2, 2, 6, 4, 3), none},
      {"p >= max{m*,sigma}", quasi(8, 2, 4, 2, 3), none},
      {"q below 1 + 1/p'", quasi(2, 2, 2, 1.25, 1), none},
      {"gradient, p'(q2-1)=2 not < 2", grad(2, 2, 4, 2, 2, 1), small},
      {"gradient, both strict", grad(3, 2, 4, 2, 2, 1), all},
      {"gradient, p=3 > sigma=2", grad(3, 2, 2, 2, 2, 1), only},
      {"gradient, q2 strict branch (2 >= (p')*)", grad(3, 2, 4, 2, 7.0 / 3.0, 7), none},
      {"gradient, q1 strict branch (sigma >= max{2*,(p')+})", grad(3, 2, 6, 5, 2, 7), none},
      {"gradient, q1 > p with p'(q1-1)=sigma, N=1", grad(3, 2, 6, 5, 2, 1), small},
      {"gradient needs m=2", grad(2, 3, 4, 2, 2, 1), none},
  };
}
}  // namespace fixture
