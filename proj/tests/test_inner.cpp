#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "inner.hpp"
#include "oracles/penalty_oracle.hpp"

using namespace knodal;
using namespace knodal::testing;

namespace {

ProblemParams k1_params() { return make_params(5e-5, 3.0, 1); }

// One converged two-component solve shared by several cases below.
const InnerSolveResult& k1_result() {
  static const InnerSolveResult r =
      minimize_on_nehari(make_mesh({0.0, 4.0, 10.0}, 24), k1_params());
  return r;
}

}  // namespace

TEST_CASE("ground-state energy obeys the b = 0 constraint identity") {
  // Every component on the constraint set with b = 0 has n = l, so the
  // minimum energy must equal (1/2 - 1/p) Σ n_i.
  const ProblemParams prm = make_params(0.0, 3.0, 0);
  const InnerSolveResult r = minimize_on_nehari(make_mesh({0.0, prm.R}, 32), prm);
  REQUIRE(r.status == InnerStatus::Converged);
  const std::vector<ComponentSummary> s = summarize(r.minimizer, prm);
  double n_total = 0.0;
  for (const ComponentSummary& c : s) n_total += c.n;
  CHECK(rel_diff(r.energy, (0.5 - 1.0 / prm.p) * n_total) <= 1e-8);
  CHECK(r.energy > 0.0);
}

TEST_CASE("constrained minimum increases with the nonlocal coefficient") {
  const auto mesh = make_mesh({0.0, 10.0}, 32);
  const InnerSolveResult r0 = minimize_on_nehari(mesh, make_params(0.0, 3.0, 0));
  const InnerSolveResult r1 = minimize_on_nehari(mesh, make_params(0.01, 3.0, 0));
  REQUIRE(r0.status == InnerStatus::Converged);
  REQUIRE(r1.status == InnerStatus::Converged);
  CHECK(r1.energy > r0.energy);
}

TEST_CASE("penalty relaxation reproduces the one-component minimum") {
  const auto V = [](double) { return 1.0; };
  const ProblemParams prm = make_params(1e-2, 3.0, 0);
  const InnerSolveResult inner = minimize_on_nehari(make_mesh({0.0, prm.R}, 32), prm);
  REQUIRE(inner.status == InnerStatus::Converged);
  const oracle::PenaltyResult pen =
      oracle::penalty_minimum({0.0, prm.R}, prm.b, prm.p, V, 32, 7);
  CHECK(rel_diff(inner.energy, pen.energy) <= 1e-4);
  CHECK(pen.constraint_violation <= 1e-8);
}

TEST_CASE("penalty relaxation reproduces the two-component minimum") {
  const auto V = [](double) { return 1.0; };
  const ProblemParams prm = make_params(5e-5, 3.0, 1);
  const InnerSolveResult inner = minimize_on_nehari(make_mesh({0.0, 4.0, 10.0}, 32), prm);
  REQUIRE(inner.status == InnerStatus::Converged);
  const oracle::PenaltyResult pen =
      oracle::penalty_minimum({0.0, 4.0, 10.0}, prm.b, prm.p, V, 32, 11);
  CHECK(rel_diff(inner.energy, pen.energy) <= 1e-3);
  CHECK(pen.constraint_violation <= 1e-8);
}

TEST_CASE("the zero candidate solves the annular system trivially") {
  const NodalCandidate zero = zero_candidate(make_mesh({0.0, 4.0, 10.0}, 16));
  for (double r : annular_system_residual(zero, k1_params())) CHECK(r == 0.0);
}

TEST_CASE("the converged minimizer solves the annular boundary-value systems") {
  const InnerSolveResult& r = k1_result();
  REQUIRE(r.status == InnerStatus::Converged);
  CHECK(r.residual <= 1e-6);
  for (double res : annular_system_residual(r.minimizer, k1_params())) CHECK(res <= 2e-6);
}

TEST_CASE("perturbing one component is visible in its annular residual") {
  const InnerSolveResult& r = k1_result();
  REQUIRE(r.status == InnerStatus::Converged);
  const std::vector<double> base = annular_system_residual(r.minimizer, k1_params());
  NodalCandidate bent = r.minimizer;
  for (double& v : bent.comps[0]) v *= 1.01;
  const std::vector<double> pert = annular_system_residual(bent, k1_params());
  CHECK(pert[0] >= 10.0 * std::max(base[0], 1e-12));
  CHECK(pert[0] >= 1e-4);
}

TEST_CASE("components keep their alternating signs nodewise") {
  const InnerSolveResult& r = k1_result();
  REQUIRE(r.status == InnerStatus::Converged);
  for (std::size_t i = 0; i < r.minimizer.comps.size(); ++i) {
    double amp = 0.0;
    for (double v : r.minimizer.comps[i]) amp = std::max(amp, std::fabs(v));
    REQUIRE(amp > 0.0);
    for (double v : r.minimizer.comps[i]) CHECK(v * expected_sign(i) >= -1e-12 * amp);
  }
}

TEST_CASE("accepted iterates never raise the energy") {
  const InnerSolveResult& r = k1_result();
  REQUIRE(r.energy_history.size() >= 2);
  for (std::size_t j = 0; j + 1 < r.energy_history.size(); ++j)
    CHECK(r.energy_history[j + 1] <= r.energy_history[j] * (1.0 + 1e-12));
  CHECK(r.energy_history.front() > r.energy_history.back());
  CHECK(rel_diff(r.energy_history.back(), r.energy) <= 1e-9);
}

TEST_CASE("the final iterate already sits on the constraint set") {
  const InnerSolveResult& r = k1_result();
  REQUIRE(r.status == InnerStatus::Converged);
  REQUIRE(r.projection.t.size() == 2);
  for (double t : r.projection.t) CHECK(std::fabs(t - 1.0) <= 1e-6);
  for (double m : r.margins) CHECK(m > 0.0);
  CHECK(r.free_vs_tangential >= 0.0);
}

TEST_CASE("the inner solve is deterministic") {
  const ProblemParams prm = make_params(5e-5, 3.0, 1);
  const auto mesh = make_mesh({0.0, 4.0, 10.0}, 16);
  const InnerSolveResult a = minimize_on_nehari(mesh, prm);
  const InnerSolveResult b = minimize_on_nehari(mesh, prm);
  REQUIRE(a.status == InnerStatus::Converged);
  CHECK(a.energy == b.energy);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.minimizer.comps.size() == b.minimizer.comps.size());
  for (std::size_t i = 0; i < a.minimizer.comps.size(); ++i)
    for (std::size_t j = 0; j < a.minimizer.comps[i].size(); ++j)
      CHECK(a.minimizer.comps[i][j] == b.minimizer.comps[i][j]);
}
