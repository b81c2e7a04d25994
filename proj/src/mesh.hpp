#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "problem.hpp"

namespace knodal {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kFourPi = 4.0 * kPi;

// How cells are distributed inside each annulus. Geometric grading shrinks
// consecutive cell widths by `ratio` toward interior junctions (one-sided for
// the innermost/outermost annulus, two-sided for annuli bounded by junctions
// on both ends). The ball with k = 0 has no junctions and stays uniform.
struct GradingSpec {
  enum class Kind { Uniform, Geometric };
  Kind kind = Kind::Uniform;
  double ratio = 2.0;

  static GradingSpec parse(const std::string& text);  // "uniform" | "geometric:<ratio>"
  std::string describe() const;
};

struct MeshSpec {
  int cells_per_annulus = 64;
  GradingSpec grading;
};

// Radial grid on [0, R] whose nodes contain every nodal radius r_i. All
// volume integrals carry the 3-D weight: ∫_{B} f dx = 4π ∫ f(t) t² dt.
struct RadialMesh {
  std::vector<double> radii;          // r_0 = 0 < r_1 < ... < r_{k+1} = R
  std::vector<double> nodes;          // s_0 = 0 < ... < s_M = R
  std::vector<std::size_t> junction;  // node index of each radii entry
  MeshSpec spec;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t cell_count() const { return nodes.size() - 1; }
  std::size_t annulus_count() const { return radii.size() - 1; }

  // node range of annulus i (0-based); both junction endpoints included
  std::size_t first_node(std::size_t i) const { return junction[i]; }
  std::size_t last_node(std::size_t i) const { return junction[i + 1]; }
  // contiguous free-node window of the annulus subproblem: the value at t = 0
  // is unconstrained, junctions and t = R are pinned to zero
  std::size_t free_lo(std::size_t i) const { return i == 0 ? 0 : junction[i] + 1; }
  std::size_t free_hi(std::size_t i) const { return junction[i + 1] - 1; }
};

// radii must include the endpoints 0 and R. Throws SolverError on a
// degenerate annulus (gap below machine scale relative to R).
RadialMesh build_mesh(const std::vector<double>& radii, const MeshSpec& spec);
// every cell split in two (junction alignment preserved)
RadialMesh refine_halve(const RadialMesh& mesh);

// 5-point Gauss–Legendre per cell on [0,1]: exact through polynomial degree
// 9, so the weights t² and t³ are integrated exactly.
inline constexpr int kQuadPoints = 5;
extern const double kQuadXi[kQuadPoints];
extern const double kQuadW[kQuadPoints];

// 4π Σ_q w_q f(t_q) t_q² over the cells [c0, c1).
template <class F>
double integrate_cells(const RadialMesh& m, std::size_t c0, std::size_t c1, F&& f) {
  double acc = 0.0;
  for (std::size_t c = c0; c < c1; ++c) {
    const double a = m.nodes[c];
    const double w = m.nodes[c + 1] - a;
    double cell = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double t = a + w * kQuadXi[q];
      cell += kQuadW[q] * f(t) * t * t;
    }
    acc += w * cell;
  }
  return kFourPi * acc;
}

template <class F>
double integrate(const RadialMesh& m, F&& f) {
  return integrate_cells(m, 0, m.cell_count(), static_cast<F&&>(f));
}

// Like integrate_cells but the integrand sees the piecewise-linear field:
// f(t, u(t), u'(t)).
template <class F>
double integrate_field_cells(const RadialMesh& m, const std::vector<double>& u,
                             std::size_t c0, std::size_t c1, F&& f) {
  double acc = 0.0;
  for (std::size_t c = c0; c < c1; ++c) {
    const double a = m.nodes[c];
    const double w = m.nodes[c + 1] - a;
    const double slope = (u[c + 1] - u[c]) / w;
    double cell = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double xi = kQuadXi[q];
      const double t = a + w * xi;
      const double val = u[c] * (1.0 - xi) + u[c + 1] * xi;
      cell += kQuadW[q] * f(t, val, slope) * t * t;
    }
    acc += w * cell;
  }
  return kFourPi * acc;
}

// A (k+1)-tuple of per-annulus fields plus the radii they live on. Each
// component is stored as a full-length nodal vector that is identically zero
// outside its annulus.
struct NodalCandidate {
  std::shared_ptr<const RadialMesh> mesh;
  std::vector<std::vector<double>> comps;
};

NodalCandidate zero_candidate(std::shared_ptr<const RadialMesh> mesh);
// hard-zero every component outside its annulus window (guards drift)
void enforce_support(NodalCandidate& c);
// u = Σ_i u_i (supports are disjoint)
std::vector<double> glue_components(const NodalCandidate& c);

// Sign changes of a nodal vector: values below 1e-9·max|u| are treated as
// zero; a sign change is a strict flip between consecutive significant nodes.
int count_sign_changes(const std::vector<double>& u);

}  // namespace knodal
