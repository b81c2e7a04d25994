#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mesh.hpp"
#include "oracles/quadrature_oracle.hpp"

using namespace knodal;
using namespace knodal::testing;

TEST_CASE("uniform subdivision places junctions on nodes") {
  const auto mesh = make_mesh({0.0, 1.0, 2.0}, 4);
  const std::vector<double> expect = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  REQUIRE(mesh->node_count() == expect.size());
  for (std::size_t j = 0; j < expect.size(); ++j) CHECK(mesh->nodes[j] == expect[j]);
  REQUIRE(mesh->junction.size() == 3);
  CHECK(mesh->junction[0] == 0);
  CHECK(mesh->junction[1] == 4);
  CHECK(mesh->junction[2] == 8);
  CHECK(mesh->annulus_count() == 2);
  CHECK(mesh->cell_count() == 8);
}

TEST_CASE("single-cell ball mesh") {
  // Below the config floor of 4 cells, but structurally valid when built
  // directly: the ball with one cell is just the two endpoints.
  const auto mesh = make_mesh({0.0, 1.0}, 1);
  REQUIRE(mesh->node_count() == 2);
  CHECK(mesh->nodes[0] == 0.0);
  CHECK(mesh->nodes[1] == 1.0);
}

TEST_CASE("geometric grading halves cell widths toward interior junctions") {
  GradingSpec g;
  g.kind = GradingSpec::Kind::Geometric;
  g.ratio = 2.0;
  const auto mesh = make_mesh({0.0, 1.0, 2.0}, 4, g);
  REQUIRE(mesh->cell_count() == 8);
  std::vector<double> w(mesh->cell_count());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = mesh->nodes[c + 1] - mesh->nodes[c];

  // First annulus grades toward its right end (the junction at r = 1):
  // consecutive widths halve approaching the junction.
  for (int c = 0; c < 3; ++c) CHECK(w[c] / w[c + 1] == doctest::Approx(2.0).epsilon(1e-12));
  // Last annulus grades toward its left end: widths grow away from r = 1.
  for (int c = 4; c < 7; ++c) CHECK(w[c + 1] / w[c] == doctest::Approx(2.0).epsilon(1e-12));
  // Mirror symmetry about the junction.
  for (int c = 0; c < 4; ++c) CHECK(w[c] == doctest::Approx(w[7 - c]).epsilon(1e-12));
  // Junction still an exact node.
  CHECK(mesh->nodes[mesh->junction[1]] == 1.0);

  // k = 0 has no interior junctions: the ball stays uniform under grading.
  const auto ball = make_mesh({0.0, 1.0}, 4, g);
  for (std::size_t c = 0; c < ball->cell_count(); ++c)
    CHECK(ball->nodes[c + 1] - ball->nodes[c] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("grading spec parses and describes") {
  const GradingSpec u = GradingSpec::parse("uniform");
  CHECK(u.kind == GradingSpec::Kind::Uniform);
  const GradingSpec g = GradingSpec::parse("geometric:1.5");
  CHECK(g.kind == GradingSpec::Kind::Geometric);
  CHECK(g.ratio == doctest::Approx(1.5));
  CHECK(GradingSpec::parse(g.describe()).ratio == doctest::Approx(1.5));
}

TEST_CASE("degenerate annulus is rejected with a diagnostic naming it") {
  MeshSpec spec;
  spec.cells_per_annulus = 4;
  try {
    build_mesh({0.0, 1e-16, 1.0}, spec);
    FAIL("expected a degenerate-annulus rejection");
  } catch (const SolverError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("degenerate annulus") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);  // names which annulus
  }
}

TEST_CASE("volume quadrature: constants and monomials") {
  const auto m2 = make_mesh({0.0, 2.0}, 16);
  const double ball_volume = integrate(*m2, [](double) { return 1.0; });
  CHECK(ball_volume == doctest::Approx(kFourPi * 8.0 / 3.0).epsilon(1e-13));

  const auto m1 = make_mesh({0.0, 1.0}, 16);
  const double t_moment = integrate(*m1, [](double t) { return t; });
  CHECK(t_moment == doctest::Approx(kPi).epsilon(1e-13));
}

TEST_CASE("quadrature is exact through degree 9") {
  // Integrand t^7 against the t^2 weight makes a degree-9 polynomial; the
  // 5-point Gauss rule must integrate it exactly: 4π/10.
  const auto m = make_mesh({0.0, 1.0}, 3);
  const double v = integrate(*m, [](double t) { return std::pow(t, 7); });
  CHECK(v == doctest::Approx(kFourPi / 10.0).epsilon(1e-14));
}

TEST_CASE("hat-profile integrals match the closed-form quadrature oracle") {
  const auto mesh = make_mesh({0.0, 2.0}, 8);
  const RadialMesh& m = *mesh;
  std::vector<double> u(m.node_count(), 0.0);
  for (std::size_t j = 0; j < m.node_count(); ++j)
    u[j] = std::max(0.0, 1.0 - std::fabs(m.nodes[j] - 1.0));

  oracle::PiecewiseProfile prof{m.nodes, u};
  const double mass2 = integrate_field_cells(m, u, 0, m.cell_count(),
                                             [](double, double v, double) { return v * v; });
  CHECK(mass2 == doctest::Approx(kFourPi * oracle::integral_u2_t2(prof)).epsilon(1e-12));

  const double dir = integrate_field_cells(m, u, 0, m.cell_count(),
                                           [](double, double, double s) { return s * s; });
  CHECK(dir == doctest::Approx(kFourPi * oracle::integral_du2_t2(prof)).epsilon(1e-12));

  const double p = 3.0;
  const double pm = integrate_field_cells(
      m, u, 0, m.cell_count(),
      [p](double, double v, double) { return std::pow(std::fabs(v), p); });
  CHECK(pm == doctest::Approx(kFourPi * oracle::integral_abs_p_t2(prof, p)).epsilon(1e-11));
}

TEST_CASE("interpolated smooth fields converge at second order") {
  // Nodal interpolant of sin(t) on [0,2]; its squared mass against the exact
  // antiderivative of t^2 sin^2 t. Halving cells must quarter the error.
  const double R = 2.0;
  const double exact =
      kFourPi * (R * R * R / 6.0 - R * R * std::sin(2.0 * R) / 4.0 -
                 R * std::cos(2.0 * R) / 4.0 + std::sin(2.0 * R) / 8.0);
  auto value_at = [&](int cells) {
    const auto mesh = make_mesh({0.0, R}, cells);
    std::vector<double> u(mesh->node_count());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sin(mesh->nodes[j]);
    return integrate_field_cells(*mesh, u, 0, mesh->cell_count(),
                                 [](double, double v, double) { return v * v; });
  };
  const double e8 = std::fabs(value_at(8) - exact);
  const double e16 = std::fabs(value_at(16) - exact);
  const double e32 = std::fabs(value_at(32) - exact);
  CHECK(e8 / e16 > 3.5);
  CHECK(e8 / e16 < 4.5);
  CHECK(e16 / e32 > 3.5);
  CHECK(e16 / e32 < 4.5);
}

TEST_CASE("refine_halve doubles cells and preserves junction alignment") {
  const auto coarse = make_mesh({0.0, 4.0, 10.0}, 6);
  const RadialMesh fine = refine_halve(*coarse);
  CHECK(fine.cell_count() == 2 * coarse->cell_count());
  REQUIRE(fine.junction.size() == coarse->junction.size());
  for (std::size_t i = 0; i < fine.junction.size(); ++i) {
    CHECK(fine.junction[i] == 2 * coarse->junction[i]);
    CHECK(fine.nodes[fine.junction[i]] == coarse->nodes[coarse->junction[i]]);
  }
  // Old nodes survive verbatim at even indices.
  for (std::size_t j = 0; j < coarse->node_count(); ++j)
    CHECK(fine.nodes[2 * j] == coarse->nodes[j]);
}

TEST_CASE("component support stays exactly zero at pinned nodes") {
  const auto mesh = make_mesh({0.0, 4.0, 10.0}, 8);
  NodalCandidate c = sine_candidate(mesh);
  // Simulate arithmetic drift, then re-enforce.
  for (auto& comp : c.comps)
    for (double& v : comp) v = v * 1.000001 + 1e-17;
  enforce_support(c);
  const RadialMesh& m = *mesh;
  for (std::size_t i = 0; i < m.annulus_count(); ++i) {
    // Pinned ends: junctions for every component, R for the last one; the
    // value at t = 0 is free for the innermost.
    if (i > 0) CHECK(c.comps[i][m.first_node(i)] == 0.0);
    CHECK(c.comps[i][m.last_node(i)] == 0.0);
    // Zero outside its own annulus.
    for (std::size_t j = 0; j < m.node_count(); ++j)
      if (j < m.first_node(i) || j > m.last_node(i)) CHECK(c.comps[i][j] == 0.0);
  }
  const std::vector<double> glued = glue_components(c);
  CHECK(glued.back() == 0.0);
  CHECK(count_sign_changes(glued) == 1);
}

TEST_CASE("sign changes ignore values below the relative floor") {
  CHECK(count_sign_changes({1.0, 1e-12, -1.0}) == 1);   // tiny midpoint is noise
  CHECK(count_sign_changes({1.0, -1.0, 1.0}) == 2);
  CHECK(count_sign_changes({0.0, 1.0, 2.0, 1.0}) == 0);
  CHECK(count_sign_changes({0.0, 0.0, 0.0}) == 0);
  CHECK(count_sign_changes({1.0, 0.0, -1.0, 0.0, 1.0}) == 2);  // grid zeros not double-counted
}
