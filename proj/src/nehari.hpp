#pragma once

#include <cstdint>
#include <vector>

#include "functional.hpp"
#include "mesh.hpp"
#include "problem.hpp"

namespace knodal {

// The three numbers the scaling system sees of each component:
// n = ‖u‖_i², d = ∫|∇u|², l = ∫|u|^p.
struct ComponentSummary {
  double n = 0.0;
  double d = 0.0;
  double l = 0.0;
};

std::vector<ComponentSummary> summarize(const NodalCandidate& cand, const ProblemParams& params);

// E = (1/2)Σn_i + (b/4)(Σd_i)² − (1/p)Σl_i; the integrals scale exactly under
// u_i ← t_i u_i (n,d by t², l by t^p), so scaled energies need no re-quadrature.
double energy_from_summaries(const std::vector<ComponentSummary>& s, double b, double p);
std::vector<ComponentSummary> scale_summaries(const std::vector<ComponentSummary>& s,
                                              const std::vector<double>& t, double p);

// --- scalar fibering map ----------------------------------------------------
// h(t) = n t^{-2} + b d² − l t^{p-4}; the fibering map of one component has
// its local maximum at the unique root of h below T = (2n/((4-p) l))^{1/(p-2)}.
double fiber_h(const ComponentSummary& s, double b, double p, double t);
double fiber_threshold(const ComponentSummary& s, double p);
// closed form of h(T): b d² − ((p-2)/(4-p)) ((4-p)/2)^{2/(p-2)} n (l/n)^{2/(p-2)}
double fiber_h_at_threshold(const ComponentSummary& s, double b, double p);

struct ScalarFiber {
  double t = 0.0;  // the root: t²n + b t⁴d² = t^p l with t < T
  double T = 0.0;
  double residual = 0.0;  // relative
};
// Bisection on h over (1e-8·T, T) plus a Newton polish; requires h(T) < 0,
// otherwise throws SolverError("inadmissible b or degenerate component ...").
ScalarFiber scalar_fiber_solve(const ComponentSummary& s, double b, double p);

// --- coupled projection -----------------------------------------------------
// Scaling tuple putting (t_1u_1, ..., t_{k+1}u_{k+1}) on the constrained
// Nehari set: for each i,
//   t_i² n_i + b t_i⁴ d_i² + μ b t_i² d_i Σ_{j≠i} t_j² d_j = t_i^p l_i
// continued in μ from the decoupled system (μ = 0) to the full one (μ = 1),
// with the strict local-maximum margin m_i = 2t_i²n_i − (4-p)t_i^p l_i > 0.
struct NehariProjection {
  std::vector<double> t;
  double mu = 1.0;
  std::vector<double> residual;   // per-component relative residual of the scaling identity
  std::vector<double> margin;     // m_i, strictly positive at acceptance
  std::vector<double> threshold;  // T_{u_i}
  int newton_iterations = 0;
};

struct CoupledSolveOpts {
  double mu_step = 0.25;
  double mu_step_floor = 1e-4;
  double newton_tol = 1e-10;  // relative residual at acceptance
  int max_newton_iters = 80;
  // nonempty: skip the continuation and run damped Newton at μ = 1 from here
  // (used by the randomized-initialization uniqueness checks)
  std::vector<double> start;
};

NehariProjection coupled_nehari_solve(const std::vector<ComponentSummary>& s, double b, double p,
                                      const CoupledSolveOpts& opts = {});
NehariProjection coupled_nehari_solve(const NodalCandidate& cand, const ProblemParams& params,
                                      const CoupledSolveOpts& opts = {});
// u_i ← t_i u_i
void apply_projection(NodalCandidate& cand, const NehariProjection& proj);

// Projection for dominated candidates ((4-p)l_i < 2n_i and F_i ≤ 0 with
// F_i = n_i + b d_i² + b d_i Σ_{j≠i} d_j − l_i): the scaling tuple lands in
// (0, 1]^{k+1} and realizes the maximum of the product energy over the box
// [0,1]^{k+1}. Throws SolverError naming the failing inequality and component.
NehariProjection project_if_dominating(const NodalCandidate& cand, const ProblemParams& params);
NehariProjection project_if_dominating(const std::vector<ComponentSummary>& s, double b, double p);

// --- admissibility thresholds -----------------------------------------------
// b_small = min{ ((p-2)/(4-p)) ((4-p)/2)^{2/(p-2)} (2S_p)^{-p/(p-2)}, b_hat },
// b_hat scales that first term by (1 + k 2^{2/(p-2)} (2/(4-p))^{2/(p-2)})^{-1},
// and the final threshold is b_star = min{ b_small, (p-2)²/(8p(4-p)α_k) }.
struct AdmissibilityReport {
  double b_small = 0.0;  // scalar fibering threshold (named b_* in reports)
  double b_hat = 0.0;
  double b_star = 0.0;
  double alpha_k_prior = 0.0;  // a-priori lower bound for α_k
  double alpha_k_used = 0.0;   // the estimate b_star was computed from
  std::vector<double> precondition;  // (l_i)^{2/p} / n_i per component
  double precondition_floor = 0.0;   // (2 S_p)^{-1}
  bool verdict = false;              // b < b_star
};
AdmissibilityReport admissibility(const ProblemParams& params,
                                  const std::vector<ComponentSummary>& s, double S_p,
                                  double alpha_k_estimate);
// (k+1)((p-2)/(4p)) S_p^{p/(p-2)}
double alpha_k_lower_bound(double p, int k, double S_p);

// --- dominance certificates ---------------------------------------------------
// Row sums of the two matrices whose diagonal dominance underpins uniqueness
// (scaling system, assembled at the projection) and manifold regularity
// (assembled at the scaled components). All positive / all negative certify.
struct DominanceCertificates {
  std::vector<double> scaling_row_sums;    // positive at acceptance
  std::vector<double> manifold_row_sums;   // negative at acceptance
  bool scaling_all_positive = false;
  bool manifold_all_negative = false;
};
DominanceCertificates dominance_certificates(const std::vector<ComponentSummary>& s,
                                             const NehariProjection& proj, double b, double p);

}  // namespace knodal
