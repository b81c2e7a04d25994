#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "outer.hpp"

using namespace knodal;
using namespace knodal::testing;

namespace {

OuterSolveOpts fast_outer(int cells) {
  OuterSolveOpts opts;
  opts.mesh.cells_per_annulus = cells;
  opts.restarts = 2;
  opts.max_evals = 200;
  opts.simplex_tol_rel = 1e-5;
  return opts;
}

// One k = 1 search at b = 0 shared by the landscape and gluing cases.
const OuterSolveResult& k1_outer() {
  static const OuterSolveResult r = minimize_phi(1, make_params(0.0, 3.0, 1), fast_outer(16));
  return r;
}

}  // namespace

TEST_CASE("the ball needs no radii search") {
  const ProblemParams prm = make_params(1e-3, 3.0, 0);
  const OuterSolveResult r = minimize_phi(0, prm, fast_outer(16));
  REQUIRE(r.radii.size() == 2);
  CHECK(r.radii[0] == 0.0);
  CHECK(r.radii[1] == prm.R);
  CHECK(r.inner.status == InnerStatus::Converged);
  CHECK(r.phi_value == r.inner.energy);
}

TEST_CASE("the optimal nodal radius is interior and beats naive placements") {
  const OuterSolveResult& r = k1_outer();
  REQUIRE(r.radii.size() == 3);
  const double r1 = r.radii[1];
  CHECK(r1 > 0.5);
  CHECK(r1 < 9.5);
  CHECK(r.evaluations > 0);
  CHECK(std::isfinite(r.phi_value));

  const ProblemParams prm = make_params(0.0, 3.0, 1);
  const OuterSolveOpts opts = fast_outer(16);

  // Re-evaluating the optimum through a cold cache reproduces the value.
  PhiCache cache;
  const double at_opt = phi({r1}, prm, opts, cache, nullptr);
  CHECK(rel_diff(at_opt, r.phi_value) <= 1e-10);

  // A squeezed inner ball and a squeezed outer annulus both cost energy.
  CHECK(phi({r1 / 10.0}, prm, opts, cache, nullptr) > at_opt);
  CHECK(phi({0.98 * prm.R}, prm, opts, cache, nullptr) > at_opt);
  CHECK(cache.size() >= 3);
}

TEST_CASE("probes squeezing an annulus below the gap floor are rejected") {
  const ProblemParams prm = make_params(0.0, 3.0, 1);
  const OuterSolveOpts opts = fast_outer(16);
  PhiCache cache;
  std::vector<PhiProbe> log;
  const double v = phi({prm.R - 0.5 * opts.gap_floor_rel * prm.R}, prm, opts, cache, &log);
  CHECK(std::isinf(v));
  REQUIRE(!log.empty());
  CHECK(!log.back().note.empty());
}

TEST_CASE("restarting the search at its own optimum stays put") {
  const OuterSolveResult& r = k1_outer();
  OuterSolveOpts opts = fast_outer(16);
  opts.start_radii = {r.radii[1]};
  opts.restarts = 1;
  const OuterSolveResult again = minimize_phi(1, make_params(0.0, 3.0, 1), opts);
  CHECK(std::fabs(again.radii[1] - r.radii[1]) <= 1e-3);
  CHECK(again.phi_value <= r.phi_value * (1.0 + 1e-8));
}

TEST_CASE("derivative jumps of a tent profile are exact") {
  const auto mesh = make_mesh({0.0, 1.0, 2.0}, 8);
  const RadialMesh& m = *mesh;
  std::vector<double> u(m.node_count());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = 1.0 - std::fabs(m.nodes[j] - 1.0);
  const std::vector<JunctionJump> jumps = derivative_jumps(m, u);
  REQUIRE(jumps.size() == 1);
  CHECK(jumps[0].r == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(jumps[0].left_slope == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(jumps[0].right_slope == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(jumps[0].jump == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(max_relative_jump(jumps, m, u) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("a ball mesh has no interior junctions") {
  const auto mesh = make_mesh({0.0, 10.0}, 8);
  std::vector<double> u(mesh->node_count(), 1.0);
  CHECK(derivative_jumps(*mesh, u).empty());
}

TEST_CASE("junction jumps of a smooth profile shrink linearly with the mesh") {
  // u = sin(pi t / 4) is smooth across t = 1, so the interpolant's one-sided
  // slopes there differ by about u'' h: doubling the resolution halves it.
  double jump[2];
  int idx = 0;
  for (int cells : {8, 16}) {
    const auto mesh = make_mesh({0.0, 1.0, 2.0}, cells);
    std::vector<double> u(mesh->node_count());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(kPi * mesh->nodes[j] / 4.0);
    const auto jumps = derivative_jumps(*mesh, u);
    REQUIRE(jumps.size() == 1);
    jump[idx++] = std::fabs(jumps[0].jump);
  }
  CHECK(jump[0] / jump[1] >= 1.7);
  CHECK(jump[0] / jump[1] <= 2.3);
}

TEST_CASE("linear interpolation evaluates affine data exactly and clamps") {
  const auto mesh = make_mesh({0.0, 2.0, 5.0}, 8);
  const RadialMesh& m = *mesh;
  std::vector<double> u(m.node_count());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = 3.0 - 0.5 * m.nodes[j];
  for (double t : {0.0, 0.3141, 1.999, 2.0, 4.2, 5.0})
    CHECK(eval_linear(m, u, t) == doctest::Approx(3.0 - 0.5 * t).epsilon(1e-14));
  CHECK(eval_linear(m, u, -3.0) == doctest::Approx(u.front()).epsilon(1e-14));
  CHECK(eval_linear(m, u, 50.0) == doctest::Approx(u.back()).epsilon(1e-14));
}

TEST_CASE("candidates transport between radii by annulus-affine sampling") {
  const auto src_mesh = make_mesh({0.0, 3.0, 10.0}, 12);
  const auto dst_mesh = make_mesh({0.0, 4.0, 10.0}, 12);
  const NodalCandidate src = sine_candidate(src_mesh);
  const NodalCandidate dst = transport_candidate(src, dst_mesh);
  REQUIRE(dst.comps.size() == 2);
  const RadialMesh& dm = *dst_mesh;
  const RadialMesh& sm = *src_mesh;
  for (std::size_t i = 0; i < 2; ++i) {
    const double a_d = dm.radii[i], b_d = dm.radii[i + 1];
    const double a_s = sm.radii[i], b_s = sm.radii[i + 1];
    for (std::size_t j = dm.free_lo(i); j <= dm.free_hi(i); ++j) {
      const double x = (dm.nodes[j] - a_d) / (b_d - a_d);
      const double expected = eval_linear(sm, src.comps[i], a_s + x * (b_s - a_s));
      CHECK(dst.comps[i][j] == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("gluing a two-component minimizer yields one sign change") {
  const OuterSolveResult& outer = k1_outer();
  const ProblemParams prm = make_params(0.0, 3.0, 1);
  const GluedSolution g = glue_and_polish(outer, prm);
  CHECK(g.sign_changes == 1);
  CHECK(g.polish_converged);
  CHECK(g.residual <= g.residual_raw);
  CHECK(g.residual <= 1e-8);
  REQUIRE(g.jumps.size() == 1);
  CHECK(g.max_rel_jump < 0.5);
  // Disjoint supports at b = 0: the raw glued energy IS the product energy.
  CHECK(rel_diff(g.energy_raw, outer.phi_value) <= 1e-12);
  CHECK(rel_diff(g.energy, g.energy_raw) <= 0.05);
}

TEST_CASE("nodal domains of the polished field keep positive margins") {
  const OuterSolveResult& outer = k1_outer();
  const ProblemParams prm = make_params(0.0, 3.0, 1);
  const GluedSolution g = glue_and_polish(outer, prm);
  const std::vector<double> margins = nodal_domain_margins(*outer.mesh, g.u, prm);
  REQUIRE(margins.size() == 2);
  for (double m : margins) CHECK(m > 0.0);
}

TEST_CASE("the radii-energy cache serves exact hits and nearest warm starts") {
  PhiCache cache;
  CHECK(cache.size() == 0);
  CHECK(cache.exact({0.0, 3.0, 10.0}) == nullptr);
  CHECK(cache.nearest({0.0, 3.0, 10.0}) == nullptr);

  PhiCache::Entry e1;
  e1.radii = {0.0, 3.0, 10.0};
  cache.insert(e1);
  PhiCache::Entry e2;
  e2.radii = {0.0, 5.0, 10.0};
  cache.insert(e2);
  CHECK(cache.size() == 2);

  const PhiCache::Entry* hit = cache.exact({0.0, 3.0, 10.0});
  REQUIRE(hit != nullptr);
  CHECK(hit->radii[1] == 3.0);
  CHECK(cache.exact({0.0, 3.1, 10.0}) == nullptr);

  const PhiCache::Entry* near = cache.nearest({0.0, 4.9, 10.0});
  REQUIRE(near != nullptr);
  CHECK(near->radii[1] == 5.0);
}
