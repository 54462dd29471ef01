#pragma once
#include <optional>
#include <vector>

#include "pm/kernel.hpp"

namespace pm {

struct FixedPointReport {
  std::vector<double> fixed_points;
  int probe_grid_size = 0;
  double tolerance = 0.0;
  bool fixed_point_free() const { return fixed_points.empty(); }
};

struct DmcPropertyReport {
  bool b1 = false;            // strictly positive transition matrix
  bool b2 = false;            // a dominance relation among posteriors / input
  bool b3_heuristic = false;  // irrational slope-log ratios (heuristic only)
  bool a3 = false;            // fixed-point free
  std::optional<std::vector<size_t>> suggested_permutation;
};

// Scans a theta-grid for points mapped to themselves by every output branch
// (DMC: each branch exactly; continuous: a 1e3-point phi-grid).
FixedPointReport fixed_point_scan(const MatchingKernel& kernel, int grid_size, double tol);

// Permutation sigma sorting p - q in descending order, so that the partial
// sums of sigma(p - q) stay strictly positive before the last index and
// sigma(q) is dominated by sigma(p). Throws IdenticalDistributions on p == q.
std::vector<size_t> dominance_permutation(const std::vector<double>& p, const std::vector<double>& q);

// Whether F_p < F_q at every point where F_q lies in (0,1).
bool dominated_by(const std::vector<double>& p, const std::vector<double>& q);

DmcPropertyReport dmc_property_check(const MatchingKernel& kernel);

}  // namespace pm
