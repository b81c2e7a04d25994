#pragma once
// Shared fixtures for the test suite: canonical parameter sets, meshes, and
// simple candidate profiles.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "functional.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace knodal::testing {

inline ProblemParams make_params(double b = 0.01, double p = 3.0, int k = 0, double R = 10.0) {
  ProblemParams prm;
  prm.b = b;
  prm.p = p;
  prm.k = k;
  prm.R = R;
  return prm;
}

inline std::shared_ptr<const RadialMesh> make_mesh(const std::vector<double>& radii, int cells,
                                                   GradingSpec grading = {}) {
  MeshSpec spec;
  spec.cells_per_annulus = cells;
  spec.grading = grading;
  return std::make_shared<const RadialMesh>(build_mesh(radii, spec));
}

// One sine bump per annulus with alternating signs (positive innermost).
inline NodalCandidate sine_candidate(std::shared_ptr<const RadialMesh> mesh, double amp = 1.0) {
  NodalCandidate c = zero_candidate(mesh);
  const RadialMesh& m = *mesh;
  for (std::size_t i = 0; i < m.annulus_count(); ++i) {
    const double a = m.radii[i];
    const double gap = m.radii[i + 1] - a;
    const double sg = (i % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t j = m.free_lo(i); j <= m.free_hi(i); ++j) {
      const double x = (m.nodes[j] - a) / gap;
      c.comps[i][j] = sg * amp * std::sin(kPi * x);
    }
  }
  enforce_support(c);
  return c;
}

// Random nodal field vanishing at R (value at the origin stays free).
inline std::vector<double> random_field(const RadialMesh& m, std::mt19937_64& rng,
                                        double amp = 1.0) {
  std::uniform_real_distribution<double> U(-amp, amp);
  std::vector<double> u(m.node_count());
  for (double& v : u) v = U(rng);
  u.back() = 0.0;
  return u;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
}

}  // namespace knodal::testing
