#pragma once

#include "outer.hpp"

namespace knodal {

// One full nodal solve: radii search, inner minimization, gluing, polish.
struct SolveOutcome {
  OuterSolveResult outer;
  GluedSolution glued;
};
SolveOutcome solve_nodal(int k, const ProblemParams& params, const OuterSolveOpts& opts,
                         const PolishOpts& polish = {});

// --- energy ordering across k -------------------------------------------------
struct MonotonicityRow {
  int k = 0;
  double energy = 0.0;  // I_b of the polished solution
  int sign_changes = 0;
  double step_margin = 0.0;  // energy(k) − energy(k−1); 0 on the first row
  double fold_margin = 0.0;  // energy(k) − (k+1)·energy(0)
  std::vector<double> radii;
  bool solved = true;  // failed solves flag the row; its comparisons are skipped
  std::string note;
};
struct MonotonicityReport {
  std::vector<MonotonicityRow> rows;
  double margin_floor = 0.0;  // 1e-6·|I_b of the ground state|
  bool verdict = false;       // every step and fold margin above the floor
};
MonotonicityReport verify_monotonicity(int k_max, const ProblemParams& params,
                                       const OuterSolveOpts& opts);

// --- vanishing-coupling limit ---------------------------------------------------
// Protocol: solve the b = 0 problem in full (radii search included), freeze
// its radii and grid, then re-solve the inner stage for each requested b > 0
// warm-started from the limit solution. Distances are grid H-norms against
// the b = 0 field; rows keep the caller's order (sort descending to read the
// limit off the tail).
struct LimitRow {
  double b = 0.0;
  double distance = 0.0;
  int sign_changes = 0;
  double energy = 0.0;  // I_b of the polished re-solve
  bool solved = false;
  std::string note;
};
struct LimitStudy {
  std::vector<double> radii;   // frozen at the b = 0 optimum
  double energy_limit = 0.0;   // I_0 of the limit solution
  int sign_changes_limit = 0;
  std::vector<LimitRow> rows;
  bool distances_decreasing = false;   // along descending b
  bool signs_constant = false;
  bool energies_decreasing = false;    // along descending b, all above the limit
};
LimitStudy sweep_b(int k, const std::vector<double>& b_list, const ProblemParams& params,
                   const OuterSolveOpts& opts);

// --- scaling identities of the ground state ------------------------------------
// All terms of the radial Derrick/Pohozaev balance
//   (1/2)∫|∇v|² + (3/2)∫V v² + (1/2)∫ t V'(t) v² + (b/2)(∫|∇v|²)² = (3/p)∫|v|^p
// plus the V-weighted combination it implies together with the scaling
// identity, and the strict-maximum membership margin of v.
struct PohozaevReport {
  double gradient_term = 0.0;      // (1/2)∫|∇v|²
  double potential_term = 0.0;     // (3/2)∫V v²
  double potential_radial = 0.0;   // (1/2)∫ t V' v²
  double kirchhoff_term = 0.0;     // (b/2)(∫|∇v|²)²
  double nonlinear_term = 0.0;     // (3/p)∫|v|^p
  // Dirichlet flux through the truncation sphere, (1+bD)/2 · R · ∮|v'(R)|² dS.
  // Part of the exact identity on the ball; decays with the solution tail as
  // R grows, which is how the untruncated identity is recovered.
  double boundary_flux = 0.0;
  double residual = 0.0;           // lhs terms + boundary_flux − nonlinear_term
  double relative = 0.0;           // residual over the largest term magnitude
  // ∫Vv² + (1/2)∫tV'v² + boundary_flux − ((6−p)/(2p))∫|v|^p
  double combination_residual = 0.0;
  double combination_relative = 0.0;
  double membership_residual = 0.0;   // |‖v‖² + bD² − ∫|v|^p| relative
  double maximum_margin = 0.0;        // 2‖v‖² − (4−p)∫|v|^p, relative to ‖v‖²
  bool strict_membership = false;     // ∫|v|^p < (2/(4−p))‖v‖²
};
PohozaevReport pohozaev_report(const RadialMesh& m, const std::vector<double>& u,
                               const ProblemParams& params);

// --- a-priori lower bounds ------------------------------------------------------
struct BoundsReport {
  double S_p = 0.0;
  double delta = 0.0;                   // slack: floors are scaled by (1 − delta)
  std::vector<double> component_norms;  // ‖ω_i‖_i of the constrained minimizer
  double norm_floor = 0.0;              // S_p^{p/(2(p−2))}
  double alpha_k = 0.0;                 // constrained minimum value
  double alpha_floor = 0.0;             // (k+1)((p−2)/(4p)) S_p^{p/(p−2)}
  bool verdict = false;
};
BoundsReport check_bounds(const SolveOutcome& outcome, const ProblemParams& params, double S_p,
                          double delta);

// --- gluing defect study ---------------------------------------------------------
struct GluingStudy {
  double jump_coarse = 0.0;  // max relative junction jump at the base grid
  double jump_fine = 0.0;    // same radii, every cell halved
  double ratio = 0.0;        // coarse / fine
  double jump_inflated = 0.0;   // raw jump with interior radii scaled by 1.2
  double jump_deflated = 0.0;   // ... scaled by 0.8
};
GluingStudy gluing_study(const SolveOutcome& outcome, const ProblemParams& params,
                         const OuterSolveOpts& opts);

// --- small helpers used across studies -------------------------------------------
// grid H-norm ‖a − b‖ through the assembled inner-product matrix
double h_norm_distance(const RadialMesh& m, const std::vector<double>& a,
                       const std::vector<double>& b, const ProblemParams& params);
// pointwise decay constant: max over nodes of |u(t)|·t / ‖u‖_H
double strauss_constant(const RadialMesh& m, const std::vector<double>& u,
                        const ProblemParams& params);

}  // namespace knodal
