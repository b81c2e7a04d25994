#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "inner.hpp"
#include "oracles/multistart_oracle.hpp"
#include "oracles/penalty_oracle.hpp"
#include "oracles/quadrature_oracle.hpp"

using namespace knodal;
using namespace knodal::testing;

TEST_CASE("closed-form piecewise integrals: constants") {
  oracle::PiecewiseProfile f{{0.0, 1.0}, {1.0, 1.0}};
  CHECK(oracle::integral_u2_t2(f) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(oracle::integral_du2_t2(f) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("closed-form piecewise integrals: the unit tent") {
  // Tent on [0,2] peaking at t = 1: slopes are +1 then -1, so
  // int (u')^2 t^2 = int_0^1 t^2 + int_1^2 t^2 = 1/3 + 7/3 = 8/3.
  oracle::PiecewiseProfile tent{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}};
  CHECK(oracle::integral_du2_t2(tent) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("adaptive |u|^p agrees with the closed form at p = 2") {
  oracle::PiecewiseProfile tent{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}};
  CHECK(oracle::integral_abs_p_t2(tent, 2.0) ==
        doctest::Approx(oracle::integral_u2_t2(tent)).epsilon(1e-12));

  // Including a sign change, where the adaptive rule splits the cell.
  oracle::PiecewiseProfile wig{{0.0, 0.7, 1.3, 2.0}, {0.5, -1.0, 0.8, 0.0}};
  CHECK(oracle::integral_abs_p_t2(wig, 2.0) ==
        doctest::Approx(oracle::integral_u2_t2(wig)).epsilon(1e-12));
}

TEST_CASE("multistart root matches the p = 3 closed form") {
  // t^2 n + b t^4 d^2 = t^3 l with n = d = l = 1 reduces to
  // b t^2 - t + 1 = 0, smaller root t = (1 - sqrt(1 - 4b))/(2b).
  const double b = 0.1;
  const std::vector<oracle::TripleSummary> s = {{1.0, 1.0, 1.0}};
  const oracle::MultistartReport rep = oracle::nehari_multistart(s, b, 3.0);
  REQUIRE(rep.t.size() == 1);
  const double closed = (1.0 - std::sqrt(1.0 - 4.0 * b)) / (2.0 * b);
  CHECK(rep.t[0] == doctest::Approx(closed).epsilon(1e-9));
  CHECK(rep.clusters == 1);
  CHECK(rep.admissible_roots >= 1);
  CHECK(rep.cluster_radius <= 1e-6);
}

TEST_CASE("multistart decouples at b = 0") {
  const double p = 2.7;
  const std::vector<oracle::TripleSummary> s = {{2.0, 1.5, 0.8}, {0.9, 0.4, 1.7}};
  const oracle::MultistartReport rep = oracle::nehari_multistart(s, 0.0, p);
  REQUIRE(rep.t.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(rep.t[i] ==
          doctest::Approx(std::pow(s[i].n / s[i].l, 1.0 / (p - 2.0))).epsilon(1e-10));
}

TEST_CASE("multistart finds one symmetric cluster for identical components") {
  const std::vector<oracle::TripleSummary> s = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  const oracle::MultistartReport rep = oracle::nehari_multistart(s, 0.02, 3.0);
  CHECK(rep.clusters == 1);
  REQUIRE(rep.t.size() == 2);
  CHECK(rel_diff(rep.t[0], rep.t[1]) <= 1e-9);
}

TEST_CASE("penalty oracle validates its arguments") {
  const auto V = [](double) { return 1.0; };
  CHECK_THROWS_AS(oracle::penalty_minimum({0.0, 1.0}, 0.0, 3.0, V, 33, 1),
                  std::runtime_error);
  CHECK_THROWS_AS(oracle::penalty_minimum({0.0, 1.0}, 0.0, 3.0, V, 1, 1),
                  std::runtime_error);
  try {
    oracle::penalty_minimum({1.0, 2.0}, 0.0, 3.0, V, 8, 1);
    FAIL("radii not anchored at zero must be rejected");
  } catch (const std::runtime_error& err) {
    CHECK(std::string(err.what()).find("zero") != std::string::npos);
  }
}

TEST_CASE("penalty oracle reproduces the constrained ground-state energy") {
  // Same uniform nodes as the production solve, fully independent descent;
  // the energies must agree to a few digits.
  const auto V = [](double) { return 1.0; };
  const int cells = 16;
  const ProblemParams prm = make_params(0.0, 3.0, 0);
  const auto mesh = make_mesh({0.0, prm.R}, cells);
  const InnerSolveResult inner = minimize_on_nehari(mesh, prm);
  REQUIRE(inner.status == InnerStatus::Converged);

  const oracle::PenaltyResult pen =
      oracle::penalty_minimum({0.0, prm.R}, prm.b, prm.p, V, cells, 20250817);
  CHECK(pen.constraint_violation <= 1e-10);
  CHECK(rel_diff(inner.energy, pen.energy) <= 1e-4);
}
