#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nehari.hpp"

namespace knodal {

// Minimization of the product energy over the constrained Nehari set of a
// fixed radii vector: projected gradient flow in the H-metric. Because the
// set is a natural constraint, the free (unprojected) gradient vanishes at
// the minimizer, and its dual norm is the convergence measure.
struct InnerSolveOpts {
  double residual_tol = 1e-6;   // relative free-gradient dual norm at acceptance
  double energy_stall = 1e-12;  // relative decrease still counted as progress
  double projection_tol = 1e-10;  // scaling-system residual inside each projection
  int max_iters = 2000;
  double armijo_slope = 1e-4;
  double S_p = 0.0;  // optional embedding constant; enables a profile-quality warning
  const NodalCandidate* init = nullptr;  // optional warm start on the same mesh
};

enum class InnerStatus { Converged, Stalled, MaxIters, NehariFailed };
const char* inner_status_name(InnerStatus s);

struct InnerSolveResult {
  NodalCandidate minimizer;  // on the constrained Nehari set
  double energy = 0.0;
  std::vector<double> energy_history;  // accepted iterates, initial included
  NehariProjection projection;         // of the final iterate (t ≈ 1)
  std::vector<double> margins;         // strict-maximum margins of the final iterate
  double residual = 0.0;               // relative free-gradient dual norm at exit
  double free_vs_tangential = 0.0;     // tangential share of the final gradient (≈1 at a
                                       // genuine free critical point)
  InnerStatus status = InnerStatus::NehariFailed;
  int iterations = 0;
  std::vector<std::string> warnings;
};

InnerSolveResult minimize_on_nehari(std::shared_ptr<const RadialMesh> mesh,
                                    const ProblemParams& params, const InnerSolveOpts& opts = {});

// Per-component relative dual-norm residual of the annular Euler–Lagrange
// system −(1 + b Σ_j d_j)Δu_i + V u_i = |u_i|^{p-2}u_i with zero boundary
// values at the annulus ends (free at t = 0 for the innermost component).
std::vector<double> annular_system_residual(const NodalCandidate& cand,
                                            const ProblemParams& params);

// The sign each component is held to: positive innermost, then alternating.
inline double expected_sign(std::size_t annulus) { return annulus % 2 == 0 ? 1.0 : -1.0; }

}  // namespace knodal
