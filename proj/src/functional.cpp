#include "functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rng.hpp"

namespace knodal {

EnergyBreakdown component_integrals(const NodalCandidate& cand, const ProblemParams& params) {
  const RadialMesh& m = *cand.mesh;
  EnergyBreakdown e;
  const std::size_t n = cand.comps.size();
  e.norm_sq.resize(n);
  e.dirichlet.resize(n);
  e.lp_mass.resize(n);
  double d_sum = 0.0, n_sum = 0.0, l_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& u = cand.comps[i];
    const std::size_t c0 = m.first_node(i), c1 = m.last_node(i);  // cell range of annulus i
    const double d = integrate_field_cells(m, u, c0, c1,
                                           [](double, double, double du) { return du * du; });
    const double vmass = integrate_field_cells(
        m, u, c0, c1, [&](double t, double v, double) { return params.potential(t) * v * v; });
    const double lp = integrate_field_cells(
        m, u, c0, c1,
        [&](double, double v, double) { return std::pow(std::fabs(v), params.p); });
    e.dirichlet[i] = d;
    e.norm_sq[i] = d + vmass;
    e.lp_mass[i] = lp;
    d_sum += d;
    n_sum += e.norm_sq[i];
    l_sum += lp;
  }
  e.kirchhoff = 0.25 * params.b * d_sum * d_sum;
  e.total = 0.5 * n_sum + e.kirchhoff - l_sum / params.p;
  return e;
}

FieldIntegrals field_integrals(const RadialMesh& m, const std::vector<double>& u,
                               const ProblemParams& params) {
  FieldIntegrals f;
  f.dirichlet =
      integrate_field_cells(m, u, 0, m.cell_count(), [](double, double, double du) { return du * du; });
  const double vmass = integrate_field_cells(
      m, u, 0, m.cell_count(), [&](double t, double v, double) { return params.potential(t) * v * v; });
  f.norm_sq = f.dirichlet + vmass;
  f.lp_mass = integrate_field_cells(
      m, u, 0, m.cell_count(),
      [&](double, double v, double) { return std::pow(std::fabs(v), params.p); });
  return f;
}

double energy_value(const FieldIntegrals& f, const ProblemParams& params) {
  return 0.5 * f.norm_sq + 0.25 * params.b * f.dirichlet * f.dirichlet - f.lp_mass / params.p;
}

Tridiag assemble_stiffness(const RadialMesh& m) {
  const std::size_t n = m.node_count();
  Tridiag K;
  K.diag.assign(n, 0.0);
  K.off.assign(n - 1, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double a = m.nodes[c], b = m.nodes[c + 1];
    const double w = b - a;
    const double i2 = (b * b * b - a * a * a) / 3.0;  // ∫ t² over the cell
    const double k = kFourPi * i2 / (w * w);
    K.diag[c] += k;
    K.diag[c + 1] += k;
    K.off[c] -= k;
  }
  return K;
}

Tridiag assemble_h_matrix(const RadialMesh& m, const ProblemParams& params) {
  Tridiag A = assemble_stiffness(m);
  for (std::size_t c = 0; c + 1 < m.node_count(); ++c) {
    const double a = m.nodes[c];
    const double w = m.nodes[c + 1] - a;
    double ll = 0.0, lr = 0.0, rr = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double xi = kQuadXi[q];
      const double t = a + w * xi;
      const double vw = kQuadW[q] * params.potential(t) * t * t;
      ll += vw * (1.0 - xi) * (1.0 - xi);
      lr += vw * (1.0 - xi) * xi;
      rr += vw * xi * xi;
    }
    A.diag[c] += kFourPi * w * ll;
    A.diag[c + 1] += kFourPi * w * rr;
    A.off[c] += kFourPi * w * lr;
  }
  return A;
}

void lp_load_cells(const RadialMesh& m, const std::vector<double>& u, double p,
                   std::size_t c0, std::size_t c1, std::vector<double>& out) {
  out.assign(m.node_count(), 0.0);
  for (std::size_t c = c0; c < c1; ++c) {
    const double a = m.nodes[c];
    const double w = m.nodes[c + 1] - a;
    double left = 0.0, right = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double xi = kQuadXi[q];
      const double t = a + w * xi;
      const double val = u[c] * (1.0 - xi) + u[c + 1] * xi;
      const double f = std::pow(std::fabs(val), p - 2.0) * val;
      const double vw = kQuadW[q] * f * t * t;
      left += vw * (1.0 - xi);
      right += vw * xi;
    }
    out[c] += kFourPi * w * left;
    out[c + 1] += kFourPi * w * right;
  }
}

std::vector<double> lp_load(const RadialMesh& m, const std::vector<double>& u, double p) {
  std::vector<double> out;
  lp_load_cells(m, u, p, 0, m.cell_count(), out);
  return out;
}

Tridiag lp_mass_matrix(const RadialMesh& m, const std::vector<double>& u, double p) {
  const std::size_t n = m.node_count();
  Tridiag W;
  W.diag.assign(n, 0.0);
  W.off.assign(n - 1, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double a = m.nodes[c];
    const double w = m.nodes[c + 1] - a;
    double ll = 0.0, lr = 0.0, rr = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double xi = kQuadXi[q];
      const double t = a + w * xi;
      const double val = u[c] * (1.0 - xi) + u[c + 1] * xi;
      const double f = std::pow(std::fabs(val), p - 2.0);
      const double vw = kQuadW[q] * f * t * t;
      ll += vw * (1.0 - xi) * (1.0 - xi);
      lr += vw * (1.0 - xi) * xi;
      rr += vw * xi * xi;
    }
    W.diag[c] += kFourPi * w * ll;
    W.diag[c + 1] += kFourPi * w * rr;
    W.off[c] += kFourPi * w * lr;
  }
  return W;
}

WeakResidual weak_residual(const RadialMesh& m, const std::vector<double>& u,
                           const ProblemParams& params) {
  const std::size_t M = m.node_count() - 1;  // last node is pinned
  const Tridiag A = assemble_h_matrix(m, params);
  const Tridiag K = assemble_stiffness(m);
  WeakResidual r;
  r.nodal.assign(m.node_count(), 0.0);

  std::vector<double> Ku(m.node_count(), 0.0), Mu(m.node_count(), 0.0);
  tridiag_matvec_window(K, u, 0, M, Ku);
  // mass term with V: A u − K u
  tridiag_matvec_window(A, u, 0, M, Mu);
  double D = 0.0;
  for (std::size_t j = 0; j <= M; ++j) D += Ku[j] * u[j];
  const std::vector<double> W = lp_load(m, u, params.p);
  for (std::size_t j = 0; j < M; ++j)
    r.nodal[j] = (1.0 + params.b * D) * Ku[j] + (Mu[j] - Ku[j]) - W[j];

  const double norm_sq = tridiag_quadratic_window(A, u, 0, M);
  if (norm_sq <= 0.0) return r;  // zero field: zero residual by construction
  const std::vector<double> z = tridiag_solve_window(A, r.nodal, 0, M - 1);
  double dual_sq = 0.0;
  for (std::size_t j = 0; j < M; ++j) dual_sq += z[j] * r.nodal[j];
  r.dual_norm = std::sqrt(std::max(0.0, dual_sq));
  r.relative = r.dual_norm / std::sqrt(norm_sq);
  return r;
}

namespace {

double lq_norm(const RadialMesh& m, const std::vector<double>& u, double q) {
  const double mass = integrate_field_cells(
      m, u, 0, m.cell_count(), [&](double, double v, double) { return std::pow(std::fabs(v), q); });
  return std::pow(mass, 1.0 / q);
}

}  // namespace

SobolevConstants estimate_S_q(const RadialMesh& m, const ProblemParams& params, double q,
                              std::uint64_t seed, int restarts) {
  const std::size_t M = m.node_count() - 1;
  const Tridiag A = assemble_h_matrix(m, params);
  SobolevConstants best;
  best.q = q;
  best.restarts = restarts;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<double> values;

  const int max_iters = 40000;
  for (int restart = 0; restart < restarts; ++restart) {
    std::vector<double> u(m.node_count(), 0.0);
    if (restart == 0) {
      for (std::size_t j = 0; j < M; ++j) u[j] = 1.0 - m.nodes[j] / m.nodes[M];
    } else {
      auto gen = substream(seed, "sobolev-restart-" + std::to_string(restart));
      std::uniform_real_distribution<double> dist(0.1, 1.0);
      for (std::size_t j = 0; j < M; ++j) u[j] = dist(gen);
    }

    auto quotient = [&](std::vector<double>& v) {
      const double nq = lq_norm(m, v, q);
      for (std::size_t j = 0; j <= M; ++j) v[j] /= nq;
      return tridiag_quadratic_window(A, v, 0, M);
    };

    double Q = quotient(u);
    std::vector<double> history{Q};
    std::vector<double> g(m.node_count(), 0.0), z, load, trial;
    int it = 0;
    double step0 = 0.0;
    for (; it < max_iters; ++it) {
      lp_load_cells(m, u, q, 0, m.cell_count(), load);
      z = tridiag_solve_window(A, load, 0, M - 1);
      double gnorm_sq = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        g[j] = 2.0 * (u[j] - Q * z[j]);
      }
      gnorm_sq = tridiag_quadratic_window(A, g, 0, M - 1);
      if (gnorm_sq <= 1e-20 * Q) break;

      if (step0 == 0.0) {
        // curvature estimate: second difference of the quotient along the
        // normalized gradient direction fixes the step scale 0.5/L
        const double gn = std::sqrt(gnorm_sq);
        const double eps = 1e-4;
        std::vector<double> up(u), um(u);
        for (std::size_t j = 0; j < M; ++j) {
          up[j] += eps * g[j] / gn;
          um[j] -= eps * g[j] / gn;
        }
        const double L =
            std::fabs(quotient(up) - 2.0 * Q + quotient(um)) / (eps * eps);
        step0 = 0.5 / std::max(1.0, L);
      }

      double tau = step0;
      bool accepted = false;
      double Q_new = Q;
      while (tau > 1e-12 * step0) {
        trial = u;
        for (std::size_t j = 0; j < M; ++j) trial[j] -= tau * g[j];
        Q_new = quotient(trial);
        if (Q_new <= Q) {  // monotone quotient guard
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      if (!accepted) break;
      u.swap(trial);
      history.push_back(Q_new);
      const bool stalled = (Q - Q_new) < 1e-12 * std::fabs(Q);
      Q = Q_new;
      if (stalled) break;
    }

    values.push_back(Q);
    if (Q < best.value) {
      best.value = Q;
      best.profile = u;
      best.iterations = it;
      best.quotient_history = std::move(history);
    }
  }

  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  best.restarts_agreement = (hi - lo) / std::max(std::fabs(lo), 1e-300);
  return best;
}

}  // namespace knodal
