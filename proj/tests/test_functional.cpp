#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "functional.hpp"
#include "helpers.hpp"
#include "inner.hpp"
#include "oracles/quadrature_oracle.hpp"

using namespace knodal;
using namespace knodal::testing;

namespace {

double glued_energy(const RadialMesh& m, const std::vector<double>& u,
                    const ProblemParams& prm) {
  return energy_value(field_integrals(m, u, prm), prm);
}

// Rayleigh quotient ||u||_H^2 / |u|_q^2 evaluated through the public integrals.
double rayleigh(const RadialMesh& m, const std::vector<double>& u, const ProblemParams& prm,
                double q) {
  const FieldIntegrals f = field_integrals(m, u, prm);
  const double qmass = integrate_field_cells(
      m, u, 0, m.cell_count(),
      [q](double, double v, double) { return std::pow(std::fabs(v), q); });
  return f.norm_sq / std::pow(qmass, 2.0 / q);
}

}  // namespace

TEST_CASE("zero candidate has zero energy and zero integrals") {
  const auto mesh = make_mesh({0.0, 4.0, 10.0}, 8);
  const NodalCandidate z = zero_candidate(mesh);
  const EnergyBreakdown e = component_integrals(z, make_params(0.01, 3.0, 1));
  CHECK(e.total == 0.0);
  CHECK(e.kirchhoff == 0.0);
  for (double v : e.norm_sq) CHECK(v == 0.0);
  for (double v : e.dirichlet) CHECK(v == 0.0);
  for (double v : e.lp_mass) CHECK(v == 0.0);
}

TEST_CASE("hat-profile energy matches the quadrature oracle at b = 0") {
  const ProblemParams prm = make_params(0.0, 3.0, 0, 2.0);
  const auto mesh = make_mesh({0.0, 2.0}, 8);
  const RadialMesh& m = *mesh;
  NodalCandidate c = zero_candidate(mesh);
  for (std::size_t j = 0; j < m.node_count(); ++j)
    c.comps[0][j] = std::max(0.0, 1.0 - std::fabs(m.nodes[j] - 1.0));
  enforce_support(c);

  const EnergyBreakdown e = component_integrals(c, prm);
  oracle::PiecewiseProfile prof{m.nodes, c.comps[0]};
  const double n_ref =
      kFourPi * (oracle::integral_du2_t2(prof) + oracle::integral_u2_t2(prof));
  const double l_ref = kFourPi * oracle::integral_abs_p_t2(prof, prm.p);
  const double e_ref = 0.5 * n_ref - l_ref / prm.p;
  CHECK(e.norm_sq[0] == doctest::Approx(n_ref).epsilon(1e-12));
  CHECK(e.lp_mass[0] == doctest::Approx(l_ref).epsilon(1e-11));
  CHECK(e.total == doctest::Approx(e_ref).epsilon(1e-11));
}

TEST_CASE("b enters only through the quartic Kirchhoff term") {
  const auto mesh = make_mesh({0.0, 4.0, 10.0}, 8);
  const NodalCandidate c = sine_candidate(mesh);
  const EnergyBreakdown e0 = component_integrals(c, make_params(0.0, 3.0, 1));
  const EnergyBreakdown e1 = component_integrals(c, make_params(0.1, 3.0, 1));
  double dsum = 0.0;
  for (double d : e0.dirichlet) dsum += d;
  CHECK(e1.total - e0.total == doctest::Approx(0.025 * dsum * dsum).epsilon(1e-12));
}

TEST_CASE("b-monotonicity on nonzero fields") {
  const auto mesh = make_mesh({0.0, 4.0, 10.0}, 8);
  const NodalCandidate c = sine_candidate(mesh);
  const double ea = component_integrals(c, make_params(0.0, 3.0, 1)).total;
  const double eb = component_integrals(c, make_params(0.01, 3.0, 1)).total;
  const double ec = component_integrals(c, make_params(0.1, 3.0, 1)).total;
  CHECK(ea < eb);
  CHECK(eb < ec);
}

TEST_CASE("disjoint-support additivity: product energy equals glued energy") {
  const auto mesh = make_mesh({0.0, 3.0, 6.0, 10.0}, 8);
  const ProblemParams prm = make_params(0.01, 3.0, 2);
  const NodalCandidate c = sine_candidate(mesh);
  const double e_product = component_integrals(c, prm).total;
  const double e_glued = glued_energy(*mesh, glue_components(c), prm);
  CHECK(rel_diff(e_product, e_glued) <= 1e-12);
}

TEST_CASE("weak residual of the zero field vanishes") {
  const auto mesh = make_mesh({0.0, 10.0}, 8);
  const std::vector<double> u(mesh->node_count(), 0.0);
  const WeakResidual r = weak_residual(*mesh, u, make_params());
  CHECK(r.dual_norm == 0.0);
  CHECK(r.relative == 0.0);
  for (double v : r.nodal) CHECK(v == 0.0);
}

TEST_CASE("weak residual matches central finite differences of the energy") {
  const ProblemParams prm = make_params(0.01, 3.0, 0);
  const auto mesh = make_mesh({0.0, 10.0}, 24);
  const RadialMesh& m = *mesh;
  std::mt19937_64 rng(424242);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> u = random_field(m, rng);
    const std::vector<double> v = random_field(m, rng);
    const WeakResidual r = weak_residual(m, u, prm);
    double pairing = 0.0;
    for (std::size_t j = 0; j < r.nodal.size(); ++j) pairing += r.nodal[j] * v[j];

    double best = 1e300;
    for (double h : {1e-3, 1e-4, 1e-5, 1e-6}) {
      std::vector<double> up = u, um = u;
      for (std::size_t j = 0; j < u.size(); ++j) {
        up[j] += h * v[j];
        um[j] -= h * v[j];
      }
      const double fd = (glued_energy(m, up, prm) - glued_energy(m, um, prm)) / (2.0 * h);
      best = std::min(best, std::fabs(fd - pairing) / std::max(std::fabs(pairing), 1e-300));
    }
    CHECK(best <= 1e-6);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("converged ground state has a small weak residual") {
  const ProblemParams prm = make_params(0.01, 3.0, 0);
  const auto mesh = make_mesh({0.0, 10.0}, 16);
  const InnerSolveResult res = minimize_on_nehari(mesh, prm);
  REQUIRE(res.status == InnerStatus::Converged);
  CHECK(res.residual <= 1e-6);
  const WeakResidual wr = weak_residual(*mesh, glue_components(res.minimizer), prm);
  CHECK(wr.relative <= 2e-6);
}

TEST_CASE("S_2 matches the first radial eigenvalue of the ball") {
  const ProblemParams prm = make_params(0.0, 3.0, 0);
  const auto mesh = make_mesh({0.0, 10.0}, 128);
  const SobolevConstants sc = estimate_S_q(*mesh, prm, 2.0, 7);
  const double exact = 1.0 + (kPi / prm.R) * (kPi / prm.R);
  CHECK(rel_diff(sc.value, exact) <= 1e-5);

  // Quotient history is nonincreasing and ends at the reported value.
  for (std::size_t i = 0; i + 1 < sc.quotient_history.size(); ++i)
    CHECK(sc.quotient_history[i + 1] <= sc.quotient_history[i] * (1.0 + 1e-12));
  REQUIRE(!sc.quotient_history.empty());
  CHECK(rel_diff(sc.quotient_history.back(), sc.value) <= 1e-12);
}

TEST_CASE("the stored minimizing profile realizes the reported quotient") {
  const ProblemParams prm = make_params(0.0, 3.0, 0);
  const auto mesh = make_mesh({0.0, 10.0}, 48);
  const SobolevConstants sc = estimate_S_q(*mesh, prm, 3.0, 11);
  REQUIRE(sc.profile.size() == mesh->node_count());
  const double rq = rayleigh(*mesh, sc.profile, prm, 3.0);
  CHECK(rel_diff(rq, sc.value) <= 1e-8);

  // 0-homogeneity: doubling the profile leaves the quotient unchanged.
  std::vector<double> doubled = sc.profile;
  for (double& v : doubled) v *= 2.0;
  CHECK(rel_diff(rayleigh(*mesh, doubled, prm, 3.0), rq) <= 1e-13);
}

TEST_CASE("S_p restarts agree to 1e-6 relative") {
  const ProblemParams prm = make_params(0.0, 3.0, 0);
  const auto mesh = make_mesh({0.0, 10.0}, 64);
  const SobolevConstants sc = estimate_S_q(*mesh, prm, 3.0, 12345, 5);
  CHECK(sc.restarts == 5);
  CHECK(sc.restarts_agreement <= 1e-6);
  CHECK(sc.value > 0.0);
}
