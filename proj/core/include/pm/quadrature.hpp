#pragma once
#include <functional>
#include <utility>
#include <vector>

namespace pm {

struct QuadResult {
  double value;
  double abs_err;
  int subdivisions;
};

// Adaptive Gauss-Kronrod (G7,K15) over [a,b]; infinite endpoints handled by
// rational substitution. Throws IntegrationFailed if tolerance is not met.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol, int max_subdiv = 4000);
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

// n-point Gauss-Legendre rule on [a,b] as (node, weight) pairs.
std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b);

}  // namespace pm
