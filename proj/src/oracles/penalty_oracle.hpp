#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace knodal::oracle {

// Independent estimate of the constrained minimum for a fixed radii vector:
// quadratic-penalty relaxation of the per-component constraints, minimized by
// finite-difference steepest descent with Barzilai–Borwein steps on the same
// piecewise-linear function space (its own uniform grid, its own composite
// Simpson quadrature), then an exact rescaling through the multistart root
// finder. Deliberately shares no quadrature, assembly, or descent code with
// the production solver; it is only trusted to a few digits and is used as a
// cross-check, not as a solver.
struct PenaltyResult {
  double energy = 0.0;  // product energy after the final exact rescaling
  std::vector<double> nodes;
  std::vector<std::vector<double>> comps;  // per component, full-length nodal values
  double constraint_violation = 0.0;       // max relative |F_i| before the rescaling
  int iterations = 0;                      // accepted descent steps, all penalty levels
};

PenaltyResult penalty_minimum(const std::vector<double>& radii, double b, double p,
                              const std::function<double(double)>& V, int cells_per_annulus,
                              std::uint64_t seed);

}  // namespace knodal::oracle
