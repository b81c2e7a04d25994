#include "oracles/penalty_oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles/multistart_oracle.hpp"

namespace knodal::oracle {

namespace {

constexpr double kFourPiLocal = 4.0 * 3.141592653589793238462643383279502884;

struct Workspace {
  std::vector<double> nodes;
  std::vector<std::size_t> junction;  // node index of each radius
  std::vector<double> radii;
  double b = 0.0;
  double p = 0.0;
  const std::function<double(double)>* V = nullptr;

  std::size_t annuli() const { return radii.size() - 1; }
  std::size_t first(std::size_t i) const { return junction[i]; }
  std::size_t last(std::size_t i) const { return junction[i + 1]; }
  std::size_t free_lo(std::size_t i) const { return i == 0 ? 0 : junction[i] + 1; }
  std::size_t free_hi(std::size_t i) const { return junction[i + 1] - 1; }
  double sign(std::size_t i) const { return i % 2 == 0 ? 1.0 : -1.0; }
};

// Composite Simpson with 8 subintervals per cell, applied to f(t)·t².
double simpson_cells(const Workspace& w, std::size_t c0, std::size_t c1,
                     const std::function<double(double)>& f) {
  constexpr int sub = 8;
  double acc = 0.0;
  for (std::size_t c = c0; c < c1; ++c) {
    const double a = w.nodes[c];
    const double h = (w.nodes[c + 1] - a) / sub;
    double cell = 0.0;
    for (int s = 0; s < sub; ++s) {
      const double x0 = a + s * h;
      const double x1 = x0 + 0.5 * h;
      const double x2 = x0 + h;
      cell += f(x0) * x0 * x0 + 4.0 * f(x1) * x1 * x1 + f(x2) * x2 * x2;
    }
    acc += cell * h / 6.0;
  }
  return kFourPiLocal * acc;
}

double lerp_at(const Workspace& w, const std::vector<double>& u, std::size_t c, double t) {
  const double a = w.nodes[c];
  const double width = w.nodes[c + 1] - a;
  const double xi = (t - a) / width;
  return u[c] * (1.0 - xi) + u[c + 1] * xi;
}

struct Triples {
  std::vector<double> n, d, l;
};

Triples component_triples(const Workspace& w, const std::vector<std::vector<double>>& comps) {
  Triples tr;
  const std::size_t m = w.annuli();
  tr.n.assign(m, 0.0);
  tr.d.assign(m, 0.0);
  tr.l.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::vector<double>& u = comps[i];
    for (std::size_t c = w.first(i); c < w.last(i); ++c) {
      const double width = w.nodes[c + 1] - w.nodes[c];
      const double slope = (u[c + 1] - u[c]) / width;
      tr.d[i] += simpson_cells(w, c, c + 1, [&](double) { return slope * slope; });
      tr.n[i] += simpson_cells(w, c, c + 1, [&](double t) {
        const double v = lerp_at(w, u, c, t);
        return slope * slope + (*w.V)(t)*v * v;
      });
      tr.l[i] += simpson_cells(w, c, c + 1, [&](double t) {
        return std::pow(std::fabs(lerp_at(w, u, c, t)), w.p);
      });
    }
  }
  return tr;
}

// Penalty objective: product energy plus rho Σ (relative constraint defect)².
double objective(const Workspace& w, const std::vector<std::vector<double>>& comps, double rho,
                 double* violation_out) {
  const Triples tr = component_triples(w, comps);
  const std::size_t m = w.annuli();
  double n_tot = 0.0, d_tot = 0.0, l_tot = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    n_tot += tr.n[i];
    d_tot += tr.d[i];
    l_tot += tr.l[i];
  }
  const double energy = 0.5 * n_tot + 0.25 * w.b * d_tot * d_tot - l_tot / w.p;
  double penalty = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double F = tr.n[i] + w.b * tr.d[i] * tr.d[i] + w.b * tr.d[i] * (d_tot - tr.d[i]) -
                     tr.l[i];
    const double scale = tr.n[i] + tr.l[i] + w.b * tr.d[i] * d_tot;
    const double rel = F / (scale > 0.0 ? scale : 1.0);
    penalty += rel * rel;
    worst = std::max(worst, std::fabs(rel));
  }
  if (violation_out != nullptr) *violation_out = worst;
  return energy + rho * penalty;
}

// Flatten the free coordinates (per component, its free node window).
struct FreeMap {
  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (component, node)
};

FreeMap free_map(const Workspace& w) {
  FreeMap fm;
  for (std::size_t i = 0; i < w.annuli(); ++i)
    for (std::size_t j = w.free_lo(i); j <= w.free_hi(i); ++j) fm.coords.emplace_back(i, j);
  return fm;
}

// Central-difference gradient plus the diagonal curvature the same three
// stencil values give for free. The nodal Euclidean metric is terribly
// conditioned (cell width and t²-weight spreads), so the caller divides the
// gradient by this diagonal — a Jacobi preconditioner costing one extra
// objective evaluation per iteration.
void fd_gradient(const Workspace& w, std::vector<std::vector<double>>& comps, double rho,
                 const FreeMap& fm, double f0, std::vector<double>& grad,
                 std::vector<double>& diag) {
  grad.assign(fm.coords.size(), 0.0);
  diag.assign(fm.coords.size(), 0.0);
  for (std::size_t c = 0; c < fm.coords.size(); ++c) {
    auto [i, j] = fm.coords[c];
    const double v = comps[i][j];
    const double h = 1e-5 * (1.0 + std::fabs(v));
    comps[i][j] = v + h;
    const double fp = objective(w, comps, rho, nullptr);
    comps[i][j] = v - h;
    const double fmn = objective(w, comps, rho, nullptr);
    comps[i][j] = v;
    grad[c] = (fp - fmn) / (2.0 * h);
    diag[c] = (fp + fmn - 2.0 * f0) / (h * h);
  }
  double dmax = 0.0;
  for (double d : diag) dmax = std::max(dmax, std::fabs(d));
  // Negative curvature keeps its magnitude (modified-Newton convention) and
  // the floor caps the preconditioner's dynamic range so no single coordinate
  // dominates the search direction.
  const double floor = dmax > 0.0 ? 1e-2 * dmax : 1.0;
  for (double& d : diag) d = std::max(std::fabs(d), floor);
}

void clip_signs(const Workspace& w, std::vector<std::vector<double>>& comps) {
  for (std::size_t i = 0; i < w.annuli(); ++i) {
    const double sg = w.sign(i);
    for (std::size_t j = w.free_lo(i); j <= w.free_hi(i); ++j)
      if (sg * comps[i][j] < 0.0) comps[i][j] = 0.0;
  }
}

}  // namespace

PenaltyResult penalty_minimum(const std::vector<double>& radii, double b, double p,
                              const std::function<double(double)>& V, int cells_per_annulus,
                              std::uint64_t seed) {
  if (radii.size() < 2 || radii.front() != 0.0)
    throw std::runtime_error("penalty check needs radii starting at zero");
  if (cells_per_annulus < 2 || cells_per_annulus > 32)
    throw std::runtime_error("penalty check is a coarse instrument: 2..32 cells per annulus");

  Workspace w;
  w.radii = radii;
  w.b = b;
  w.p = p;
  w.V = &V;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const double a = radii[i], bb = radii[i + 1];
    w.junction.push_back(w.nodes.size());
    for (int c = 0; c < cells_per_annulus; ++c)
      w.nodes.push_back(a + (bb - a) * c / cells_per_annulus);
  }
  w.junction.push_back(w.nodes.size());
  w.nodes.push_back(radii.back());

  const std::size_t m = w.annuli();
  std::vector<std::vector<double>> comps(m, std::vector<double>(w.nodes.size(), 0.0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = w.radii[i], gap = w.radii[i + 1] - a;
    // The innermost profile peaks at the origin and decays on the scale of
    // the potential well, so a wide ball gets a decaying start rather than a
    // broad arch — the plain descent below is slow at large reshaping.
    const double beta = std::max(0.0, gap - 2.0);
    for (std::size_t j = w.free_lo(i); j <= w.free_hi(i); ++j) {
      const double x = (w.nodes[j] - a) / gap;
      const double shape = (i == 0) ? (1.0 - x) * std::exp(-beta * x)
                                    : std::sin(3.14159265358979324 * x);
      comps[i][j] = w.sign(i) * shape * jitter(rng);
    }
  }
  // amplitude from each component's own decoupled scaling root
  {
    const Triples tr = component_triples(w, comps);
    for (std::size_t i = 0; i < m; ++i) {
      if (!(tr.n[i] > 0.0) || !(tr.l[i] > 0.0))
        throw std::runtime_error("penalty check produced a degenerate starting component");
      const double scale = std::pow(tr.n[i] / tr.l[i], 1.0 / (p - 2.0));
      for (double& v : comps[i]) v *= scale;
    }
  }

  PenaltyResult out;
  const FreeMap fm = free_map(w);
  std::vector<double> grad, grad_prev, step_prev;
  // The penalty saturates (each relative defect is capped at 1), so rho must
  // dwarf the energy scale of the start or the descent walks off to the zero
  // field, which costs only the saturated penalty. Key the ladder to Σn_i of
  // the rescaled start: along the scaling ray the energy curvature is of that
  // order, and rho beyond it makes the constrained minimum a genuine local
  // minimum of the penalized objective.
  double n_scale = 0.0;
  {
    const Triples tr0 = component_triples(w, comps);
    for (std::size_t i = 0; i < m; ++i) n_scale += tr0.n[i];
  }
  // Most of the shape progress happens on the softest rung (stiffer rungs
  // mostly pin the constraint), so the budget is front-loaded.
  const double rho_ladder[] = {8.0 * n_scale, 80.0 * n_scale, 800.0 * n_scale};
  const int iter_budget[] = {900, 300, 150};
  int rung = -1;
  for (double rho : rho_ladder) {
    ++rung;
    double f = objective(w, comps, rho, nullptr);
    double tau = 1.0;  // dir is curvature-scaled, so the natural step is O(1)
    grad_prev.clear();
    step_prev.clear();
    std::vector<double> diag, dir;
    for (int iter = 0; iter < iter_budget[rung]; ++iter) {
      fd_gradient(w, comps, rho, fm, f, grad, diag);
      dir.assign(grad.size(), 0.0);
      for (std::size_t c = 0; c < grad.size(); ++c) dir[c] = grad[c] / diag[c];
      double gnorm_sq = 0.0;
      for (std::size_t c = 0; c < grad.size(); ++c) gnorm_sq += grad[c] * dir[c];
      if (gnorm_sq <= 1e-14 * std::max(1.0, f * f)) break;
      if (!grad_prev.empty()) {
        // Barzilai–Borwein on the preconditioned pair: tau = sᵀs / sᵀy with
        // s the last step and y the preconditioned-gradient difference
        double ss = 0.0, sy = 0.0;
        for (std::size_t c = 0; c < dir.size(); ++c) {
          ss += step_prev[c] * step_prev[c];
          sy += step_prev[c] * (dir[c] - grad_prev[c]);
        }
        if (sy > 0.0) tau = ss / sy;
        tau = std::min(std::max(tau, 1e-10), 10.0);
      }
      bool moved = false;
      double trial_tau = tau;
      for (int back = 0; back < 40; ++back) {
        std::vector<std::vector<double>> trial = comps;
        for (std::size_t c = 0; c < fm.coords.size(); ++c) {
          auto [i, j] = fm.coords[c];
          trial[i][j] -= trial_tau * dir[c];
        }
        clip_signs(w, trial);
        const double ft = objective(w, trial, rho, nullptr);
        if (ft < f - 1e-10 * std::fabs(f)) {
          step_prev.assign(fm.coords.size(), 0.0);
          for (std::size_t c = 0; c < fm.coords.size(); ++c) {
            auto [i, j] = fm.coords[c];
            step_prev[c] = trial[i][j] - comps[i][j];
          }
          comps = std::move(trial);
          f = ft;
          moved = true;
          ++out.iterations;
          break;
        }
        trial_tau *= 0.5;
      }
      if (!moved) break;
      grad_prev = dir;
    }
    // Pull the iterate back onto the constraint set exactly before the next
    // rung: the radial defect is removable by scaling alone, and descending
    // from the set spends the next budget on shape instead of on scale. An
    // iterate too close to its scaling-feasibility edge has no admissible
    // root; the rescale is only an accelerator, so keep the raw scale then.
    try {
      const Triples tr_r = component_triples(w, comps);
      std::vector<TripleSummary> summ_r(m);
      for (std::size_t i = 0; i < m; ++i)
        summ_r[i] = TripleSummary{tr_r.n[i], tr_r.d[i], tr_r.l[i]};
      const MultistartReport root_r = nehari_multistart(summ_r, b, p);
      for (std::size_t i = 0; i < m; ++i)
        for (double& v : comps[i]) v *= root_r.t[i];
    } catch (const std::exception&) {
    }
  }

  // Exact rescaling through the independent root finder, then the energy.
  // When the final profile lives at its scaling-feasibility edge the root
  // finder can come back empty; the saturated penalty already holds the
  // constraints to constraint_violation, so the raw scale stands in then.
  Triples tr = component_triples(w, comps);
  objective(w, comps, 0.0, &out.constraint_violation);
  std::vector<TripleSummary> summ(m);
  for (std::size_t i = 0; i < m; ++i) summ[i] = TripleSummary{tr.n[i], tr.d[i], tr.l[i]};
  std::vector<double> t_final(m, 1.0);
  try {
    const MultistartReport root = nehari_multistart(summ, b, p);
    t_final = root.t;
  } catch (const std::exception&) {
  }
  double n_tot = 0.0, d_tot = 0.0, l_tot = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = t_final[i];
    for (double& v : comps[i]) v *= t;
    n_tot += t * t * tr.n[i];
    d_tot += t * t * tr.d[i];
    l_tot += std::pow(t, p) * tr.l[i];
  }
  out.energy = 0.5 * n_tot + 0.25 * b * d_tot * d_tot - l_tot / p;
  out.nodes = w.nodes;
  out.comps = std::move(comps);
  return out;
}

}  // namespace knodal::oracle
