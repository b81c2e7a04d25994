#pragma once

#include <cstdint>
#include <vector>

#include "mesh.hpp"
#include "problem.hpp"
#include "tridiag.hpp"

namespace knodal {

// Per-component pieces of the product energy
//   E_b(u_1,...,u_{k+1}) = (1/2) Σ‖u_i‖_i² + (b/4)(Σ D_i)² − (1/p) Σ L_i
// with ‖u‖_i² = ∫(|∇u|² + V u²), D_i = ∫|∇u_i|², L_i = ∫|u_i|^p. For a glued
// field (k = 0 shape) the same formula is the plain energy I_b.
struct EnergyBreakdown {
  std::vector<double> norm_sq;
  std::vector<double> dirichlet;
  std::vector<double> lp_mass;
  double kirchhoff = 0.0;
  double total = 0.0;
};

EnergyBreakdown component_integrals(const NodalCandidate& cand, const ProblemParams& params);

struct FieldIntegrals {
  double norm_sq = 0.0;
  double dirichlet = 0.0;
  double lp_mass = 0.0;
};
FieldIntegrals field_integrals(const RadialMesh& m, const std::vector<double>& u,
                               const ProblemParams& params);
// I_b from the three integrals
double energy_value(const FieldIntegrals& f, const ProblemParams& params);

// --- assembly -------------------------------------------------------------
// H-inner-product matrix 4π∫(φ_i'φ_j' + V φ_iφ_j) t² dt over all nodes.
Tridiag assemble_h_matrix(const RadialMesh& m, const ProblemParams& params);
// stiffness 4π∫ φ_i'φ_j' t² dt
Tridiag assemble_stiffness(const RadialMesh& m);
// load vector W_j = 4π∫ |u|^{p-2} u φ_j t² dt (cells [c0, c1))
std::vector<double> lp_load(const RadialMesh& m, const std::vector<double>& u, double p);
void lp_load_cells(const RadialMesh& m, const std::vector<double>& u, double p,
                   std::size_t c0, std::size_t c1, std::vector<double>& out);
// weighted mass 4π∫ |u|^{p-2} φ_iφ_j t² dt (the derivative of lp_load is
// (p-1) times this)
Tridiag lp_mass_matrix(const RadialMesh& m, const std::vector<double>& u, double p);

// --- first variation --------------------------------------------------------
// residual_j = ⟨I_b'(u), φ_j⟩ on free nodes (all but t = R); dual norm is the
// H-norm of the Riesz representative.
struct WeakResidual {
  std::vector<double> nodal;
  double dual_norm = 0.0;
  double relative = 0.0;  // dual_norm / ‖u‖_H, 0 for u = 0
};
WeakResidual weak_residual(const RadialMesh& m, const std::vector<double>& u,
                           const ProblemParams& params);

// --- embedding constant -----------------------------------------------------
// S_q = inf ‖u‖²_H / |u|_q² over the radial space (free at 0, zero at R),
// estimated by a normalized gradient flow with a monotone quotient.
struct SobolevConstants {
  double q = 0.0;
  double value = 0.0;
  std::vector<double> profile;
  int iterations = 0;
  int restarts = 0;
  double restarts_agreement = 0.0;  // max relative spread across restarts
  std::vector<double> quotient_history;  // of the best restart
};
SobolevConstants estimate_S_q(const RadialMesh& m, const ProblemParams& params, double q,
                              std::uint64_t seed, int restarts = 5);

}  // namespace knodal
