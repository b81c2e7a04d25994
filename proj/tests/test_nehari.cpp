#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "nehari.hpp"

using namespace knodal;
using namespace knodal::testing;

namespace {

ComponentSummary cs(double n, double d, double l) {
  ComponentSummary s;
  s.n = n;
  s.d = d;
  s.l = l;
  return s;
}

}  // namespace

TEST_CASE("scalar fibering root decouples at b = 0") {
  const double p = 2.6;
  const ComponentSummary s = cs(2.3, 1.1, 0.7);
  const ScalarFiber f = scalar_fiber_solve(s, 0.0, p);
  CHECK(f.t == doctest::Approx(std::pow(s.n / s.l, 1.0 / (p - 2.0))).epsilon(1e-12));
  CHECK(scalar_fiber_solve(cs(1.0, 0.3, 1.0), 0.0, 3.3).t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scalar fibering root matches the p = 3 closed form") {
  // t^2 + 0.1 t^4 = t^3 reduces to 0.1 t^2 - t + 1 = 0.
  const double b = 0.1;
  const ScalarFiber f = scalar_fiber_solve(cs(1.0, 1.0, 1.0), b, 3.0);
  const double closed = (1.0 - std::sqrt(1.0 - 4.0 * b)) / (2.0 * b);
  CHECK(f.t == doctest::Approx(closed).epsilon(1e-9));
  CHECK(f.residual <= 1e-12);
  CHECK(f.t < f.T);
}

TEST_CASE("fibering threshold T for p = 3 unit summaries") {
  CHECK(fiber_threshold(cs(1.0, 0.7, 1.0), 3.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("too-large b is rejected as inadmissible") {
  // p = 3, n = d = l = 1: h(T) = b - 1/4, so b = 10 has no fibering maximum.
  try {
    scalar_fiber_solve(cs(1.0, 1.0, 1.0), 10.0, 3.0);
    FAIL("expected an inadmissibility rejection");
  } catch (const SolverError& err) {
    CHECK(std::string(err.what()).find("inadmissible b") != std::string::npos);
  }
  CHECK(fiber_h_at_threshold(cs(1.0, 1.0, 1.0), 10.0, 3.0) ==
        doctest::Approx(10.0 - 0.25).epsilon(1e-12));
}

TEST_CASE("one-component coupled solve equals the scalar solve") {
  const ComponentSummary s = cs(1.7, 0.9, 1.2);
  const double b = 1e-3, p = 3.0;
  const NehariProjection proj = coupled_nehari_solve(std::vector<ComponentSummary>{s}, b, p);
  const ScalarFiber f = scalar_fiber_solve(s, b, p);
  REQUIRE(proj.t.size() == 1);
  CHECK(proj.t[0] == doctest::Approx(f.t).epsilon(1e-10));
  CHECK(proj.mu == 1.0);
}

TEST_CASE("identical components project symmetrically") {
  const std::vector<ComponentSummary> s = {cs(1.0, 1.0, 1.0), cs(1.0, 1.0, 1.0)};
  const double b = 0.02, p = 3.0;
  const NehariProjection proj = coupled_nehari_solve(s, b, p);
  REQUIRE(proj.t.size() == 2);
  CHECK(rel_diff(proj.t[0], proj.t[1]) <= 1e-9);
  // Symmetric reduction: t^2 + 2 b t^4 = t^3, i.e. 2b t^2 - t + 1 = 0.
  const double closed = (1.0 - std::sqrt(1.0 - 8.0 * b)) / (4.0 * b);
  CHECK(proj.t[0] == doctest::Approx(closed).epsilon(1e-9));
  for (double r : proj.residual) CHECK(r <= 1e-10);
  for (double m : proj.margin) CHECK(m > 0.0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(proj.t[i] < proj.threshold[i]);
}

TEST_CASE("projection idempotence") {
  const std::vector<ComponentSummary> s = {cs(1.3, 0.9, 1.1), cs(0.8, 0.5, 1.4)};
  const double b = 2e-3, p = 3.0;
  const NehariProjection proj = coupled_nehari_solve(s, b, p);
  const std::vector<ComponentSummary> scaled = scale_summaries(s, proj.t, p);
  const NehariProjection again = coupled_nehari_solve(scaled, b, p);
  for (double t : again.t) CHECK(std::fabs(t - 1.0) <= 1e-8);
}

TEST_CASE("randomized Newton starts converge to one projection") {
  std::mt19937_64 rng(9001);
  std::uniform_real_distribution<double> U(0.5, 2.0);
  std::uniform_real_distribution<double> J(0.7, 1.4);
  const double b = 1e-3, p = 3.0;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<ComponentSummary> s;
    for (int i = 0; i < 3; ++i) {
      const double n = U(rng);
      s.push_back(cs(n, n * 0.8, U(rng)));
    }
    const NehariProjection ref = coupled_nehari_solve(s, b, p);
    for (int init = 0; init < 10; ++init) {
      CoupledSolveOpts opts;
      for (double t : ref.t) opts.start.push_back(t * J(rng));
      const NehariProjection other = coupled_nehari_solve(s, b, p, opts);
      for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(rel_diff(other.t[i], ref.t[i]) <= 1e-8);
    }
  }
}

TEST_CASE("fibering map decreases before T and increases after") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.3, 3.0);
  std::uniform_real_distribution<double> P(2.2, 3.8);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = P(rng);
    const ComponentSummary s = cs(U(rng), U(rng), U(rng));
    const double T = fiber_threshold(s, p);
    const double b = 0.1 / (T * T);  // any b: the shape of h is b-independent
    double prev = fiber_h(s, b, p, 0.01 * T);
    for (int j = 1; j <= 50; ++j) {
      const double t = (0.01 + 0.98 * j / 50.0) * T;
      const double h = fiber_h(s, b, p, t);
      CHECK(h < prev);
      prev = h;
    }
    prev = fiber_h(s, b, p, 1.001 * T);
    for (int j = 1; j <= 50; ++j) {
      const double t = T * std::pow(100.0, j / 50.0);  // up to 100 T
      const double h = fiber_h(s, b, p, t);
      CHECK(h > prev);
      prev = h;
    }
  }
}

TEST_CASE("h(T) is negative below the scalar threshold") {
  // Random summaries mimicking genuine fields: d <= n (V > 0) and the
  // p-mass precondition (l)^{2/p}/n >= 1/(2 S_p). For every b below the
  // scalar admissibility threshold the fibering maximum must exist.
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  const double S_p = 1.0;
  const double p_choices[] = {2.5, 3.0, 3.5};
  for (int trial = 0; trial < 100; ++trial) {
    const double p = p_choices[trial % 3];
    const double n = 0.5 + 4.5 * U01(rng);
    const double d = n * U01(rng);
    const double l = std::pow(n / (2.0 * S_p), p / 2.0) * (1.05 + 2.0 * U01(rng));
    const ComponentSummary s = cs(n, d, l);

    ProblemParams prm = make_params(0.0, p, 0);
    const AdmissibilityReport rep =
        admissibility(prm, {s}, S_p, alpha_k_lower_bound(p, 0, S_p));
    REQUIRE(rep.b_small > 0.0);
    CHECK(rep.precondition[0] >= rep.precondition_floor);

    const double b = 0.999 * rep.b_small * U01(rng);
    CHECK(fiber_h_at_threshold(s, b, p) < 0.0);
    const ScalarFiber f = scalar_fiber_solve(s, b, p);
    CHECK(f.residual <= 1e-12);
    CHECK(f.t < f.T);
  }
}

TEST_CASE("admissibility thresholds reproduce the p = 3 worked values") {
  const ComponentSummary s = cs(2.0, 1.0, 1.0);
  const double S_p = 1.0;

  ProblemParams prm1 = make_params(1e-3, 3.0, 1);
  const AdmissibilityReport r1 = admissibility(prm1, {s, s}, S_p, 1.0);
  CHECK(r1.b_hat == doctest::Approx(1.0 / 544.0).epsilon(1e-14));
  CHECK(r1.b_small == doctest::Approx(1.0 / 544.0).epsilon(1e-14));
  // alpha = 1: the alpha leg is 1/24 > 1/544, so b_star keeps the scalar leg.
  CHECK(r1.b_star == doctest::Approx(1.0 / 544.0).epsilon(1e-14));
  CHECK(r1.verdict);  // 1e-3 < 1/544

  prm1.b = 2e-3;
  CHECK_FALSE(admissibility(prm1, {s, s}, S_p, 1.0).verdict);

  // k = 0 drops the hat correction and exposes the scalar term.
  ProblemParams prm0 = make_params(1e-3, 3.0, 0);
  const AdmissibilityReport r0 = admissibility(prm0, {s}, S_p, 1.0);
  CHECK(r0.b_small == doctest::Approx(1.0 / 32.0).epsilon(1e-14));

  // b* shrinks as the alpha estimate grows.
  const AdmissibilityReport big = admissibility(prm0, {s}, S_p, 100.0);
  CHECK(big.b_star < r0.b_star);
  CHECK(big.b_star == doctest::Approx(1.0 / 2400.0).epsilon(1e-12));

  // The a-priori bound (k+1)((p-2)/(4p)) S_p^{p/(p-2)}.
  CHECK(alpha_k_lower_bound(3.0, 1, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

  // precondition entries are l^{2/p}/n against the floor 1/(2 S_p)
  CHECK(r0.precondition[0] == doctest::Approx(std::pow(s.l, 2.0 / 3.0) / s.n).epsilon(1e-14));
  CHECK(r0.precondition_floor == doctest::Approx(0.5).epsilon(1e-14));

  // b = 0 is always admissible.
  ProblemParams prm_zero = make_params(0.0, 3.0, 0);
  CHECK(admissibility(prm_zero, {s}, S_p, 1.0).verdict);
}

TEST_CASE("dominance certificates reduce to the margin for one component") {
  const ComponentSummary s = cs(1.0, 1.0, 1.0);
  const double b = 0.1, p = 3.0;
  const NehariProjection proj = coupled_nehari_solve(std::vector<ComponentSummary>{s}, b, p);
  const DominanceCertificates cert = dominance_certificates({s}, proj, b, p);
  REQUIRE(cert.scaling_row_sums.size() == 1);
  CHECK(cert.scaling_row_sums[0] == doctest::Approx(proj.margin[0]).epsilon(1e-12));
  CHECK(cert.scaling_all_positive);
  CHECK(cert.manifold_all_negative);
}

TEST_CASE("dominance certificates at b = 0 reduce to margins componentwise") {
  const std::vector<ComponentSummary> s = {cs(1.3, 0.9, 1.1), cs(0.8, 0.5, 1.4)};
  const NehariProjection proj = coupled_nehari_solve(s, 0.0, 3.0);
  const DominanceCertificates cert = dominance_certificates(s, proj, 0.0, 3.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(cert.scaling_row_sums[i] == doctest::Approx(proj.margin[i]).epsilon(1e-12));
  CHECK(cert.scaling_all_positive);
  CHECK(cert.manifold_all_negative);
}

TEST_CASE("certificates pass at accepted coupled projections") {
  const std::vector<ComponentSummary> s = {cs(1.0, 0.8, 1.2), cs(1.4, 1.0, 1.6),
                                           cs(0.9, 0.7, 1.0)};
  const double b = 5e-4, p = 3.0;
  const NehariProjection proj = coupled_nehari_solve(s, b, p);
  for (double r : proj.residual) CHECK(r <= 1e-10);
  const DominanceCertificates cert = dominance_certificates(s, proj, b, p);
  CHECK(cert.scaling_all_positive);
  CHECK(cert.manifold_all_negative);
  for (double v : cert.manifold_row_sums) CHECK(v < 0.0);
}

TEST_CASE("dominated projection: manifold points stay fixed") {
  // Exact-arithmetic manifold pair: n = d = 1, l = 1 + 2b makes t = (1,1)
  // the literal root with F = 0, inside the dominated region for p = 3.5.
  const double b = 0.25, p = 3.5;
  const std::vector<ComponentSummary> s = {cs(1.0, 1.0, 1.5), cs(1.0, 1.0, 1.5)};
  const NehariProjection proj = project_if_dominating(s, b, p);
  for (double t : proj.t) CHECK(std::fabs(t - 1.0) <= 1e-9);
}

TEST_CASE("dominated projection: doubled manifold candidates halve back at b = 0") {
  // At b = 0 the manifold means n = l; doubling scales n by 4 and l by
  // 2^p, so the box maximum sits at t = 2^{(2-p)/(p-2)} ... = 1/2 for p = 3.5.
  const double p = 3.5;
  const std::vector<ComponentSummary> base = {cs(1.0, 0.5, 1.0), cs(0.75, 0.25, 0.75)};
  const std::vector<ComponentSummary> doubled =
      scale_summaries(base, {2.0, 2.0}, p);
  const NehariProjection proj = project_if_dominating(doubled, 0.0, p);
  for (double t : proj.t) CHECK(t == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("dominated projection maximizes the energy over the unit box") {
  const double b = 0.05, p = 3.0;
  const std::vector<ComponentSummary> s = {cs(1.0, 0.8, 1.3), cs(1.2, 0.6, 1.5)};
  const NehariProjection proj = project_if_dominating(s, b, p);
  for (double t : proj.t) {
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
  }
  const double best = energy_from_summaries(scale_summaries(s, proj.t, p), b, p);
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> t = {U(rng), U(rng)};
    const double e = energy_from_summaries(scale_summaries(s, t, p), b, p);
    CHECK(e <= best + 1e-10 * std::fabs(best));
  }
}

TEST_CASE("dominated projection rejects violated preconditions by name") {
  // (4-p) l >= 2 n fails the strict-maximum inequality.
  try {
    project_if_dominating({cs(1.0, 0.5, 10.0)}, 0.0, 3.0);
    FAIL("expected a precondition rejection");
  } catch (const SolverError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("component 0") != std::string::npos);
  }
  // F > 0: the component sits before its fibering maximum.
  try {
    project_if_dominating({cs(2.0, 0.1, 1.0)}, 0.0, 3.0);
    FAIL("expected an F-sign rejection");
  } catch (const SolverError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("component 0") != std::string::npos);
    CHECK(msg.find("F") != std::string::npos);
  }
}
