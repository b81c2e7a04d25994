#include "outer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "rng.hpp"
#include "tridiag.hpp"

namespace knodal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Probes whose inner stage ends short of full convergence are still usable
// for the radii search as long as the residual is merely loose, not broken.
constexpr double kLooseResidual = 1e-3;

std::string fmt_note(const char* pattern, double x) {
  char buf[192];
  std::snprintf(buf, sizeof buf, pattern, x);
  return std::string(buf);
}

// GL5 integration of f(t, u(t), u'(t)) t² over [lo, hi] ∩ cells, extending
// each cell's linear function onto the clipped subinterval.
template <class F>
double integrate_partial(const RadialMesh& m, const std::vector<double>& u, double lo, double hi,
                         F&& f) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    const double a = m.nodes[c], b = m.nodes[c + 1];
    const double cl = std::max(a, lo), cr = std::min(b, hi);
    if (!(cr > cl)) continue;
    const double w = b - a;
    const double slope = (u[c + 1] - u[c]) / w;
    const double seg = cr - cl;
    double cell = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double t = cl + seg * kQuadXi[q];
      const double val = u[c] + slope * (t - a);
      cell += kQuadW[q] * f(t, val, slope) * t * t;
    }
    acc += seg * cell;
  }
  return kFourPi * acc;
}

}  // namespace

double eval_linear(const RadialMesh& m, const std::vector<double>& u, double t) {
  if (t <= m.nodes.front()) return u.front();
  if (t >= m.nodes.back()) return u.back();
  const auto it = std::upper_bound(m.nodes.begin(), m.nodes.end(), t);
  const std::size_t c = static_cast<std::size_t>(it - m.nodes.begin()) - 1;
  const double a = m.nodes[c];
  const double xi = (t - a) / (m.nodes[c + 1] - a);
  return u[c] * (1.0 - xi) + u[c + 1] * xi;
}

NodalCandidate transport_candidate(const NodalCandidate& src,
                                   std::shared_ptr<const RadialMesh> dst) {
  const RadialMesh& sm = *src.mesh;
  const RadialMesh& dm = *dst;
  if (sm.annulus_count() != dm.annulus_count())
    throw SolverError("candidate transport needs matching annulus counts");
  NodalCandidate out = zero_candidate(dst);
  for (std::size_t i = 0; i < dm.annulus_count(); ++i) {
    const double a_new = dm.radii[i], gap_new = dm.radii[i + 1] - a_new;
    const double a_old = sm.radii[i], gap_old = sm.radii[i + 1] - a_old;
    for (std::size_t j = dm.first_node(i); j <= dm.last_node(i); ++j) {
      const double x = (dm.nodes[j] - a_new) / gap_new;
      out.comps[i][j] = eval_linear(sm, src.comps[i], a_old + x * gap_old);
    }
  }
  enforce_support(out);
  return out;
}

std::string PhiCache::key(const std::vector<double>& radii) {
  std::string k;
  char buf[32];
  for (double r : radii) {
    std::snprintf(buf, sizeof buf, "%.12e|", r);
    k += buf;
  }
  return k;
}

const PhiCache::Entry* PhiCache::exact(const std::vector<double>& radii) const {
  const auto it = entries_.find(key(radii));
  return it == entries_.end() ? nullptr : &it->second;
}

const PhiCache::Entry* PhiCache::nearest(const std::vector<double>& radii) const {
  const Entry* best = nullptr;
  double best_dist = kInf;
  for (const auto& [k, e] : entries_) {
    if (e.radii.size() != radii.size()) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
      dist = std::max(dist, std::fabs(e.radii[i] - radii[i]));
    if (dist < best_dist) {
      best_dist = dist;
      best = &e;
    }
  }
  return best;
}

void PhiCache::insert(Entry e) { entries_[key(e.radii)] = std::move(e); }

double phi(const std::vector<double>& interior_radii, const ProblemParams& params,
           const OuterSolveOpts& opts, PhiCache& cache, std::vector<PhiProbe>* log) {
  std::vector<double> radii;
  radii.reserve(interior_radii.size() + 2);
  radii.push_back(0.0);
  for (double r : interior_radii) radii.push_back(r);
  radii.push_back(params.R);

  const double floor = opts.gap_floor_rel * params.R;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    if (!(radii[i + 1] - radii[i] >= floor)) {
      if (log != nullptr)
        log->push_back({radii, kInf, fmt_note("annulus gap below the search floor %.3e", floor)});
      return kInf;
    }
  }

  if (const PhiCache::Entry* hit = cache.exact(radii)) return hit->inner.energy;

  auto mesh = std::make_shared<const RadialMesh>(build_mesh(radii, opts.mesh));
  InnerSolveOpts inner_opts = opts.inner;
  NodalCandidate warm;
  if (const PhiCache::Entry* near = cache.nearest(radii)) {
    warm = transport_candidate(near->inner.minimizer, mesh);
    inner_opts.init = &warm;
  }

  InnerSolveResult inner = minimize_on_nehari(mesh, params, inner_opts);
  std::string note;
  double value = kInf;
  if (inner.status == InnerStatus::Converged) {
    value = inner.energy;
  } else if (inner.status != InnerStatus::NehariFailed && inner.residual <= kLooseResidual) {
    value = inner.energy;
    note = fmt_note("accepted with loose residual %.3e", inner.residual);
    note += " (";
    note += inner_status_name(inner.status);
    note += ")";
  } else {
    note = inner_status_name(inner.status);
  }
  if (log != nullptr) log->push_back({radii, value, note});
  if (value < kInf)
    cache.insert(PhiCache::Entry{radii, mesh, std::move(inner)});
  return value;
}

InnerSolveResult inner_on_radii(const std::vector<double>& radii, const ProblemParams& params,
                                const InnerSolveOpts& inner_opts, const MeshSpec& spec,
                                const NodalCandidate* warm,
                                std::shared_ptr<const RadialMesh>* mesh_out) {
  auto mesh = std::make_shared<const RadialMesh>(build_mesh(radii, spec));
  InnerSolveOpts local = inner_opts;
  NodalCandidate moved;
  if (warm != nullptr) {
    moved = transport_candidate(*warm, mesh);
    local.init = &moved;
  }
  if (mesh_out != nullptr) *mesh_out = mesh;
  return minimize_on_nehari(mesh, params, local);
}

namespace {

std::vector<double> radii_from_gaps(const std::vector<double>& x) {
  std::vector<double> interior(x.size());
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r += std::exp(x[i]);
    interior[i] = r;
  }
  return interior;
}

double simplex_diameter_radii(const std::vector<std::vector<double>>& verts) {
  double diam = 0.0;
  for (std::size_t a = 0; a < verts.size(); ++a) {
    const std::vector<double> ra = radii_from_gaps(verts[a]);
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      const std::vector<double> rb = radii_from_gaps(verts[b]);
      for (std::size_t i = 0; i < ra.size(); ++i)
        diam = std::max(diam, std::fabs(ra[i] - rb[i]));
    }
  }
  return diam;
}

}  // namespace

OuterSolveResult minimize_phi(int k, const ProblemParams& params, const OuterSolveOpts& opts) {
  OuterSolveResult res;
  PhiCache cache;

  if (k == 0) {
    const double value = phi({}, params, opts, cache, &res.probe_log);
    res.evaluations = 1;
    if (!(value < kInf))
      throw SolverError("radii search found no admissible configuration: the single-annulus "
                        "problem did not produce a certified minimizer");
    const PhiCache::Entry* e = cache.exact({0.0, params.R});
    res.radii = e->radii;
    res.mesh = e->mesh;
    res.inner = e->inner;
    res.phi_value = value;
    return res;
  }

  int evals_left = opts.max_evals;
  auto phi_of = [&](const std::vector<double>& x) -> double {
    if (evals_left <= 0) return kInf;
    --evals_left;
    ++res.evaluations;
    return phi(radii_from_gaps(x), params, opts, cache, &res.probe_log);
  };

  double best_value = kInf;
  std::vector<double> best_x;
  double best_diam = kInf;

  bool use_start = opts.start_radii.size() == static_cast<std::size_t>(k);
  for (std::size_t i = 0; use_start && i < opts.start_radii.size(); ++i) {
    const double lo = i == 0 ? 0.0 : opts.start_radii[i - 1];
    if (!(opts.start_radii[i] > lo) || !(opts.start_radii[i] < params.R)) use_start = false;
  }

  for (int restart = 0; restart < opts.restarts && evals_left > 0; ++restart) {
    // Centre on the requested radii when given, else on volume equipartition;
    // jittered on all but the first restart.
    std::vector<double> gaps(static_cast<std::size_t>(k));
    double prev = 0.0;
    for (int i = 1; i <= k; ++i) {
      const double r = use_start ? opts.start_radii[static_cast<std::size_t>(i - 1)]
                                 : params.R * std::cbrt(static_cast<double>(i) / (k + 1));
      gaps[static_cast<std::size_t>(i - 1)] = r - prev;
      prev = r;
    }
    std::vector<double> x0(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) x0[i] = std::log(gaps[i]);
    if (restart > 0) {
      char name[48];
      std::snprintf(name, sizeof name, "radii-restart-%d", restart);
      std::mt19937_64 gen = substream(opts.seed, name);
      std::uniform_real_distribution<double> jitter(-0.2, 0.2);
      for (double& xi : x0) xi += jitter(gen);
    }

    const std::size_t n = x0.size();
    std::vector<std::vector<double>> verts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += 0.25;
    std::vector<double> fvals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fvals[i] = phi_of(verts[i]);

    while (evals_left > 0) {
      std::vector<std::size_t> order(n + 1);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
      const std::size_t lo = order[0], hi = order[n];
      const std::size_t second_hi = order[n - 1];

      const double diam = simplex_diameter_radii(verts);
      if (fvals[lo] < best_value) {
        best_value = fvals[lo];
        best_x = verts[lo];
        best_diam = diam;
      }
      if (diam < opts.simplex_tol_rel * params.R) break;
      if (!(fvals[lo] < kInf) && res.evaluations > (k + 1) * 10) break;  // hopeless start

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == hi) continue;
        for (std::size_t c = 0; c < n; ++c) centroid[c] += verts[i][c];
      }
      for (double& c : centroid) c /= static_cast<double>(n);

      auto blend = [&](double coef) {
        std::vector<double> x(n);
        for (std::size_t c = 0; c < n; ++c) x[c] = centroid[c] + coef * (verts[hi][c] - centroid[c]);
        return x;
      };

      std::vector<double> xr = blend(-1.0);
      const double fr = phi_of(xr);
      if (fr < fvals[lo]) {
        std::vector<double> xe = blend(-2.0);
        const double fe = phi_of(xe);
        if (fe < fr) {
          verts[hi] = std::move(xe);
          fvals[hi] = fe;
        } else {
          verts[hi] = std::move(xr);
          fvals[hi] = fr;
        }
      } else if (fr < fvals[second_hi]) {
        verts[hi] = std::move(xr);
        fvals[hi] = fr;
      } else {
        const bool outside = fr < fvals[hi];
        std::vector<double> xc = blend(outside ? -0.5 : 0.5);
        const double fc = phi_of(xc);
        if ((outside && fc <= fr) || (!outside && fc < fvals[hi])) {
          verts[hi] = std::move(xc);
          fvals[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= n; ++i) {
            if (i == lo) continue;
            for (std::size_t c = 0; c < n; ++c)
              verts[i][c] = verts[lo][c] + 0.5 * (verts[i][c] - verts[lo][c]);
            fvals[i] = phi_of(verts[i]);
          }
        }
      }
    }
  }

  if (!(best_value < kInf))
    throw SolverError("radii search found no admissible configuration: every probe was "
                      "rejected (thin annuli or failed inner solves)");

  std::vector<double> radii = {0.0};
  for (double r : radii_from_gaps(best_x)) radii.push_back(r);
  radii.push_back(params.R);
  const PhiCache::Entry* e = cache.exact(radii);
  if (e == nullptr)
    throw SolverError("radii search lost its best probe");  // cannot happen: finite ⇒ cached
  res.radii = e->radii;
  res.mesh = e->mesh;
  res.inner = e->inner;
  res.phi_value = best_value;
  res.simplex_diameter = best_diam;
  return res;
}

std::vector<JunctionJump> derivative_jumps(const RadialMesh& m, const std::vector<double>& u) {
  std::vector<JunctionJump> out;
  for (std::size_t i = 1; i + 1 < m.radii.size(); ++i) {
    const std::size_t j = m.junction[i];
    JunctionJump jj;
    jj.r = m.nodes[j];
    jj.left_slope = (u[j] - u[j - 1]) / (m.nodes[j] - m.nodes[j - 1]);
    jj.right_slope = (u[j + 1] - u[j]) / (m.nodes[j + 1] - m.nodes[j]);
    jj.jump = jj.right_slope - jj.left_slope;
    out.push_back(jj);
  }
  return out;
}

double max_relative_jump(const std::vector<JunctionJump>& jumps, const RadialMesh& m,
                         const std::vector<double>& u) {
  double max_slope = 0.0;
  for (std::size_t c = 0; c < m.cell_count(); ++c)
    max_slope = std::max(max_slope,
                         std::fabs((u[c + 1] - u[c]) / (m.nodes[c + 1] - m.nodes[c])));
  if (max_slope == 0.0) return 0.0;
  double worst = 0.0;
  for (const JunctionJump& j : jumps) worst = std::max(worst, std::fabs(j.jump));
  return worst / max_slope;
}

std::vector<double> nodal_domain_margins(const RadialMesh& m, const std::vector<double>& u,
                                         const ProblemParams& params) {
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::fabs(v));
  if (umax == 0.0) return {};
  const double floor = 1e-9 * umax;

  // Domain breakpoints: interpolated zero crossings between nodes of strictly
  // opposite significant sign; exact (near-)zero nodes separate domains when
  // the neighbouring significant signs differ.
  std::vector<double> cuts = {0.0};
  int last_sign = 0;
  std::size_t last_idx = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (std::fabs(u[j]) <= floor) continue;
    const int sign = u[j] > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) {
      double cut = 0.5 * (m.nodes[last_idx] + m.nodes[j]);
      for (std::size_t c = last_idx; c < j; ++c) {
        if (u[c] * u[c + 1] < 0.0) {
          cut = m.nodes[c] + (m.nodes[c + 1] - m.nodes[c]) * u[c] / (u[c] - u[c + 1]);
          break;
        }
        if (std::fabs(u[c + 1]) <= floor) {
          cut = m.nodes[c + 1];
          break;
        }
      }
      cuts.push_back(cut);
    }
    last_sign = sign;
    last_idx = j;
  }
  cuts.push_back(m.nodes.back());

  std::vector<double> margins;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double n = integrate_partial(m, u, cuts[i], cuts[i + 1],
                                       [&](double t, double val, double slope) {
                                         return slope * slope + params.potential(t) * val * val;
                                       });
    const double l = integrate_partial(m, u, cuts[i], cuts[i + 1],
                                       [&](double t, double val, double) {
                                         (void)t;
                                         return std::pow(std::fabs(val), params.p);
                                       });
    margins.push_back(2.0 * n - (4.0 - params.p) * l);
  }
  return margins;
}

GluedSolution glue_and_polish(const OuterSolveResult& outer, const ProblemParams& params,
                              const PolishOpts& opts) {
  const RadialMesh& m = *outer.mesh;
  GluedSolution out;
  out.u_raw = glue_components(outer.inner.minimizer);
  out.jumps = derivative_jumps(m, out.u_raw);
  out.max_rel_jump = max_relative_jump(out.jumps, m, out.u_raw);
  out.residual_raw = weak_residual(m, out.u_raw, params).relative;
  out.energy_raw = energy_value(field_integrals(m, out.u_raw, params), params);

  const Tridiag A = assemble_h_matrix(m, params);
  const Tridiag K = assemble_stiffness(m);
  const std::size_t M = m.node_count() - 1;  // free nodes [0, M-1], u(R) pinned

  std::vector<double> u = out.u_raw;
  std::vector<double> r(m.node_count(), 0.0), ku(m.node_count(), 0.0), au(m.node_count(), 0.0);
  std::vector<double> load, z(m.node_count(), 0.0), wc, wd;

  auto residual_at = [&](const std::vector<double>& v, std::vector<double>& rv,
                         std::vector<double>& kv) -> double {
    // rv = A v + b D (K v) − W_p(v) on the free window; euclidean norm out
    tridiag_matvec_window(K, v, 0, M - 1, kv);
    tridiag_matvec_window(A, v, 0, M - 1, au);
    double D = tridiag_quadratic_window(K, v, 0, M);  // includes the pinned tail zeros
    lp_load_cells(m, v, params.p, 0, m.cell_count(), load);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      rv[j] = au[j] + params.b * D * kv[j] - load[j];
      norm2 += rv[j] * rv[j];
    }
    return std::sqrt(norm2);
  };

  double rnorm = residual_at(u, r, ku);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // relative dual-norm convergence check
    tridiag_solve_window(A, r, 0, M - 1, z, wc, wd);
    double dual_sq = 0.0;
    for (std::size_t j = 0; j < M; ++j) dual_sq += r[j] * z[j];
    const double norm_h = tridiag_quadratic_window(A, u, 0, M);
    out.residual = std::sqrt(std::max(dual_sq, 0.0) / std::max(norm_h, 1e-300));
    if (out.residual <= opts.tol) {
      out.polish_converged = true;
      break;
    }

    // Jacobian (1 + bD)K + M_V − (p−1) M_p + 2b (Ku)(Ku)ᵀ: tridiagonal part
    // by merging, rank-one part by Sherman–Morrison.
    const double D = tridiag_quadratic_window(K, u, 0, M);
    const Tridiag Mp = lp_mass_matrix(m, u, params.p);
    Tridiag T;
    T.diag.resize(m.node_count());
    T.off.resize(m.node_count() - 1);
    for (std::size_t j = 0; j < m.node_count(); ++j)
      T.diag[j] = (1.0 + params.b * D) * K.diag[j] + (A.diag[j] - K.diag[j]) -
                  (params.p - 1.0) * Mp.diag[j];
    for (std::size_t j = 0; j + 1 < m.node_count(); ++j)
      T.off[j] = (1.0 + params.b * D) * K.off[j] + (A.off[j] - K.off[j]) -
                 (params.p - 1.0) * Mp.off[j];

    std::vector<double> rhs(m.node_count(), 0.0);
    for (std::size_t j = 0; j < M; ++j) rhs[j] = -r[j];
    std::vector<double> z1(m.node_count(), 0.0), z2(m.node_count(), 0.0);
    tridiag_solve_window(T, rhs, 0, M - 1, z1, wc, wd);
    tridiag_solve_window(T, ku, 0, M - 1, z2, wc, wd);
    double ytz1 = 0.0, ytz2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      ytz1 += ku[j] * z1[j];
      ytz2 += ku[j] * z2[j];
    }
    const double denom = 1.0 + 2.0 * params.b * ytz2;
    std::vector<double> step(m.node_count(), 0.0);
    const double coef = denom != 0.0 ? 2.0 * params.b * ytz1 / denom : 0.0;
    for (std::size_t j = 0; j < M; ++j) step[j] = z1[j] - coef * z2[j];

    double damping = 1.0;
    bool moved = false;
    std::vector<double> trial(m.node_count(), 0.0), rt(m.node_count(), 0.0),
        kt(m.node_count(), 0.0);
    while (damping >= 1e-10) {
      for (std::size_t j = 0; j < M; ++j) trial[j] = u[j] + damping * step[j];
      const double rtn = residual_at(trial, rt, kt);
      if (rtn <= (1.0 - 1e-4 * damping) * rnorm) {
        u = trial;
        r = rt;
        ku = kt;
        rnorm = rtn;
        moved = true;
        break;
      }
      damping *= 0.5;
    }
    ++out.polish_iterations;
    if (!moved) break;
  }
  if (!out.polish_converged) {
    // the loop may have exited by iteration count with the residual already good
    tridiag_solve_window(A, r, 0, M - 1, z, wc, wd);
    double dual_sq = 0.0;
    for (std::size_t j = 0; j < M; ++j) dual_sq += r[j] * z[j];
    const double norm_h = tridiag_quadratic_window(A, u, 0, M);
    out.residual = std::sqrt(std::max(dual_sq, 0.0) / std::max(norm_h, 1e-300));
    out.polish_converged = out.residual <= opts.tol;
  }

  out.u = std::move(u);
  out.sign_changes = count_sign_changes(out.u);
  out.energy = energy_value(field_integrals(m, out.u, params), params);
  out.nodal_margins = nodal_domain_margins(m, out.u, params);
  return out;
}

}  // namespace knodal
