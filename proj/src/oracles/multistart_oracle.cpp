#include "oracles/multistart_oracle.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace knodal::oracle {

namespace {

void residual(const std::vector<TripleSummary>& s, const std::vector<double>& t, double b,
              double p, std::vector<double>& G) {
  const std::size_t m = s.size();
  G.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double cross = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) cross += t[j] * t[j] * s[j].d;
    G[i] = t[i] * t[i] * s[i].n + b * std::pow(t[i], 4) * s[i].d * s[i].d +
           b * t[i] * t[i] * s[i].d * cross - std::pow(t[i], p) * s[i].l;
  }
}

void jacobian(const std::vector<TripleSummary>& s, const std::vector<double>& t, double b,
              double p, std::vector<double>& J) {
  const std::size_t m = s.size();
  J.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double cross = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) cross += t[j] * t[j] * s[j].d;
    J[i * m + i] = 2.0 * t[i] * s[i].n + 4.0 * b * std::pow(t[i], 3) * s[i].d * s[i].d +
                   2.0 * b * t[i] * s[i].d * cross - p * std::pow(t[i], p - 1.0) * s[i].l;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) J[i * m + j] = 2.0 * b * t[i] * t[i] * t[j] * s[i].d * s[j].d;
  }
}

double det2(double a, double b, double c, double d) { return a * d - b * c; }

// Cramer's rule for m in {1, 2, 3}; the systems this oracle faces never get
// bigger (three sign changes and up are out of its contract).
bool cramer_solve(const std::vector<double>& J, const std::vector<double>& rhs,
                  std::vector<double>& x) {
  const std::size_t m = rhs.size();
  x.assign(m, 0.0);
  if (m == 1) {
    if (J[0] == 0.0) return false;
    x[0] = rhs[0] / J[0];
    return true;
  }
  if (m == 2) {
    const double D = det2(J[0], J[1], J[2], J[3]);
    if (D == 0.0) return false;
    x[0] = det2(rhs[0], J[1], rhs[1], J[3]) / D;
    x[1] = det2(J[0], rhs[0], J[2], rhs[1]) / D;
    return true;
  }
  if (m == 3) {
    auto det3 = [](const double* a) {
      return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
             a[2] * (a[3] * a[7] - a[4] * a[6]);
    };
    const double D = det3(J.data());
    if (D == 0.0) return false;
    double M[9];
    for (std::size_t col = 0; col < 3; ++col) {
      for (std::size_t i = 0; i < 9; ++i) M[i] = J[i];
      for (std::size_t row = 0; row < 3; ++row) M[row * 3 + col] = rhs[row];
      x[col] = det3(M) / D;
    }
    return true;
  }
  return false;
}

// Largest per-component residual relative to that component's own scale. The
// scaling is per component on purpose: a run that collapses one t_i toward 0
// keeps a relative defect of order one there and is never reported converged,
// even though its absolute residual vanishes against the other components.
double relative_error(const std::vector<TripleSummary>& s, const std::vector<double>& t,
                      double p, const std::vector<double>& G) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double scale = t[i] * t[i] * s[i].n + std::pow(t[i], p) * s[i].l;
    err = std::max(err, std::fabs(G[i]) / std::max(scale, 1e-300));
  }
  return err;
}

bool newton_from(const std::vector<TripleSummary>& s, double b, double p,
                 std::vector<double>& t) {
  const std::size_t m = s.size();
  std::vector<double> G, J, step;
  for (int iter = 0; iter < 120; ++iter) {
    residual(s, t, b, p, G);
    const double err = relative_error(s, t, p, G);
    if (err <= 1e-13) return true;
    jacobian(s, t, b, p, J);
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -G[i];
    if (!cramer_solve(J, rhs, step)) return false;
    double damping = 1.0;
    bool moved = false;
    while (damping >= 1e-8) {
      bool ok = true;
      std::vector<double> trial(m);
      for (std::size_t i = 0; i < m; ++i) {
        trial[i] = t[i] + damping * step[i];
        if (!(trial[i] > 0.0) || !(trial[i] < 1e6)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        std::vector<double> Gt;
        residual(s, trial, b, p, Gt);
        const double errt = relative_error(s, trial, p, Gt);
        if (errt < err) {
          t = std::move(trial);
          moved = true;
          break;
        }
      }
      damping *= 0.5;
    }
    if (!moved) return false;
  }
  return false;
}

}  // namespace

MultistartReport nehari_multistart(const std::vector<TripleSummary>& s, double b, double p,
                                   int grid_density) {
  const std::size_t m = s.size();
  if (m == 0 || m > 3)
    throw std::runtime_error("multistart verifier handles one to three components");
  MultistartReport rep;

  std::vector<double> levels(static_cast<std::size_t>(grid_density));
  for (int i = 0; i < grid_density; ++i) {
    const double frac = grid_density == 1 ? 0.5 : static_cast<double>(i) / (grid_density - 1);
    levels[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * frac);
  }

  std::vector<std::vector<double>> roots;
  std::vector<std::size_t> idx(m, 0);
  while (true) {
    std::vector<double> t(m);
    for (std::size_t i = 0; i < m; ++i) t[i] = levels[idx[i]];
    ++rep.grid_points;
    if (newton_from(s, b, p, t)) {
      ++rep.converged;
      bool admissible = true;
      for (std::size_t i = 0; i < m; ++i) {
        const double margin =
            2.0 * t[i] * t[i] * s[i].n - (4.0 - p) * std::pow(t[i], p) * s[i].l;
        if (!(margin > 1e-14 * t[i] * t[i] * s[i].n)) admissible = false;
      }
      if (admissible) {
        ++rep.admissible_roots;
        roots.push_back(std::move(t));
      }
    }
    std::size_t carry = 0;
    while (carry < m) {
      if (++idx[carry] < levels.size()) break;
      idx[carry] = 0;
      ++carry;
    }
    if (carry == m) break;
  }

  // Cluster the admissible roots by relative sup distance.
  std::vector<std::vector<double>> centers;
  std::vector<int> counts;
  for (const std::vector<double>& r : roots) {
    bool placed = false;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double dist = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        dist = std::max(dist, std::fabs(r[i] - centers[c][i]) /
                                  std::max(std::fabs(centers[c][i]), 1e-300));
      if (dist <= 1e-6) {
        for (std::size_t i = 0; i < m; ++i)
          centers[c][i] = (centers[c][i] * counts[c] + r[i]) / (counts[c] + 1);
        ++counts[c];
        rep.cluster_radius = std::max(rep.cluster_radius, dist);
        placed = true;
        break;
      }
    }
    if (!placed) {
      centers.push_back(r);
      counts.push_back(1);
    }
  }
  rep.clusters = static_cast<int>(centers.size());
  if (rep.clusters == 0)
    throw std::runtime_error("multistart verifier found no admissible scaling root");
  if (rep.clusters > 1) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "multistart verifier found %d distinct admissible scaling roots "
                  "(uniqueness counterexample candidate)",
                  rep.clusters);
    throw std::runtime_error(buf);
  }
  rep.t = centers.front();
  return rep;
}

}  // namespace knodal::oracle
