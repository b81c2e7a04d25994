#pragma once

#include <vector>

namespace knodal::oracle {

// Independent root finder for the coupled scaling system
//   t_i² n_i + b t_i⁴ d_i² + b t_i² d_i Σ_{j≠i} t_j² d_j = t_i^p l_i,
// used to cross-check the production projection: sweep a log-spaced grid of
// starting points over [1e-3, 1e3]^m, run plain Newton from each, keep the
// converged roots satisfying the strict-maximum margin, and cluster them.
// Everything here is self-contained (own residual, own Jacobian, own linear
// solves via Cramer's rule for m <= 3).

struct TripleSummary {
  double n = 0.0;  // squared norm
  double d = 0.0;  // Dirichlet integral
  double l = 0.0;  // p-mass
};

struct MultistartReport {
  std::vector<double> t;  // center of the (unique) cluster
  int grid_points = 0;
  int converged = 0;        // Newton runs that reached tolerance
  int admissible_roots = 0; // converged roots with all margins positive
  int clusters = 0;
  double cluster_radius = 0.0;  // widest relative spread inside the cluster
};

// Throws std::runtime_error when the admissible roots form more than one
// cluster (a uniqueness counterexample candidate) or none at all.
MultistartReport nehari_multistart(const std::vector<TripleSummary>& s, double b, double p,
                                   int grid_density = 7);

}  // namespace knodal::oracle
