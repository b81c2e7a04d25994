#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "inner.hpp"

namespace knodal {

// Evaluate a piecewise-linear nodal field at an arbitrary point (clamped to
// the grid interval).
double eval_linear(const RadialMesh& m, const std::vector<double>& u, double t);

// Move a candidate to a mesh with different radii: per annulus, the affine
// parameter map between the old and new interval, values sampled from the
// old piecewise-linear profile. Used to warm-start nearby radii probes.
NodalCandidate transport_candidate(const NodalCandidate& src,
                                   std::shared_ptr<const RadialMesh> dst);

struct OuterSolveOpts {
  int restarts = 3;
  int max_evals = 400;           // radii-energy evaluations across all restarts
  double simplex_tol_rel = 1e-4; // × R: simplex diameter in radii space at stop
  double gap_floor_rel = 1e-3;   // × R: probes with a thinner annulus are rejected
  std::uint64_t seed = 12345;
  // Interior radii to centre the simplex search on; volume equipartition when
  // empty. A strong coupling shifts the feasible radii well away from the
  // equipartition point, so callers chain searches along increasing coupling.
  std::vector<double> start_radii;
  InnerSolveOpts inner;
  MeshSpec mesh;
};

struct PhiProbe {
  std::vector<double> radii;  // full vector with endpoints
  double value = 0.0;         // +inf when rejected
  std::string note;           // empty when the probe converged cleanly
};

// Cache of inner solves keyed by the (rounded) radii vector; also serves
// nearest-neighbour warm starts.
class PhiCache {
 public:
  struct Entry {
    std::vector<double> radii;
    std::shared_ptr<const RadialMesh> mesh;
    InnerSolveResult inner;
  };

  const Entry* exact(const std::vector<double>& radii) const;
  const Entry* nearest(const std::vector<double>& radii) const;
  void insert(Entry e);
  std::size_t size() const { return entries_.size(); }

 private:
  static std::string key(const std::vector<double>& radii);
  std::map<std::string, Entry> entries_;
};

// The radii-to-energy map: constrained minimum of the product energy on the
// grid built over these radii. Returns +inf (and records why) when the inner
// stage cannot certify a minimizer.
double phi(const std::vector<double>& interior_radii, const ProblemParams& params,
           const OuterSolveOpts& opts, PhiCache& cache, std::vector<PhiProbe>* log = nullptr);

struct OuterSolveResult {
  std::vector<double> radii;  // optimal, with endpoints
  std::shared_ptr<const RadialMesh> mesh;
  InnerSolveResult inner;
  double phi_value = 0.0;
  double simplex_diameter = 0.0;  // in radii space at termination
  int evaluations = 0;
  std::vector<PhiProbe> probe_log;
};

// Outer minimization over the nodal radii (Nelder–Mead on the logarithms of
// the first k annulus gaps; k = 0 needs no search). Throws SolverError when
// no probe ever produced a finite value.
OuterSolveResult minimize_phi(int k, const ProblemParams& params, const OuterSolveOpts& opts);

// Inner solve on explicitly given radii (endpoints included) — the fixed-radii
// entry point used by refinement and parameter-sweep studies. A warm-start
// candidate from any mesh with the same annulus count is transported over.
InnerSolveResult inner_on_radii(const std::vector<double>& radii, const ProblemParams& params,
                                const InnerSolveOpts& inner_opts, const MeshSpec& spec,
                                const NodalCandidate* warm = nullptr,
                                std::shared_ptr<const RadialMesh>* mesh_out = nullptr);

// --- gluing and polish --------------------------------------------------------
struct JunctionJump {
  double r = 0.0;
  double left_slope = 0.0;
  double right_slope = 0.0;
  double jump = 0.0;  // right − left
};
std::vector<JunctionJump> derivative_jumps(const RadialMesh& m, const std::vector<double>& u);
// max |jump| over max cell |slope|: the scale-free gluing defect
double max_relative_jump(const std::vector<JunctionJump>& jumps, const RadialMesh& m,
                         const std::vector<double>& u);

struct PolishOpts {
  double tol = 1e-8;  // relative dual-norm residual
  int max_iters = 60;
};

struct GluedSolution {
  std::vector<double> u;      // polished field
  std::vector<double> u_raw;  // glued components before the polish
  int sign_changes = 0;
  double residual = 0.0;      // relative dual norm of the polished field
  double residual_raw = 0.0;
  std::vector<JunctionJump> jumps;  // measured before the polish
  double max_rel_jump = 0.0;
  double energy = 0.0;      // I_b of the polished field
  double energy_raw = 0.0;  // I_b of the raw glued field
  std::vector<double> nodal_margins;  // strict-maximum margin per nodal domain (polished)
  int polish_iterations = 0;
  bool polish_converged = false;
};

// Sum the components, measure the junction defects, then run a full-space
// damped Newton on the glued field (tridiagonal-plus-rank-one Jacobian).
GluedSolution glue_and_polish(const OuterSolveResult& outer, const ProblemParams& params,
                              const PolishOpts& opts = {});

// Strict-maximum margin 2‖u‖² − (4-p)∫|u|^p over each nodal domain of u,
// splitting cells at interpolated zero crossings.
std::vector<double> nodal_domain_margins(const RadialMesh& m, const std::vector<double>& u,
                                         const ProblemParams& params);

}  // namespace knodal
