#include "nehari.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>

#include "dense.hpp"

namespace knodal {

namespace {

std::string fmt(const char* pattern, ...) {
  va_list args;
  va_start(args, pattern);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

// Residual of the scaling system at t for coupling strength mu:
//   G_i = t_i² n_i + b t_i⁴ d_i² + μ b t_i² d_i Σ_{j≠i} t_j² d_j − t_i^p l_i,
// together with a per-component magnitude scale (the sum of |term|).
struct SystemEval {
  std::vector<double> G;
  std::vector<double> scale;
  double worst_relative = 0.0;
};

SystemEval eval_system(const std::vector<ComponentSummary>& s, const std::vector<double>& t,
                       double b, double p, double mu) {
  const std::size_t n = s.size();
  SystemEval ev;
  ev.G.resize(n);
  ev.scale.resize(n);
  double coupling_total = 0.0;  // Σ_j t_j² d_j
  for (std::size_t j = 0; j < n; ++j) coupling_total += t[j] * t[j] * s[j].d;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti2 = t[i] * t[i];
    const double quad = ti2 * s[i].n;
    const double quart = b * ti2 * ti2 * s[i].d * s[i].d;
    const double cross = mu * b * ti2 * s[i].d * (coupling_total - ti2 * s[i].d);
    const double power = std::pow(t[i], p) * s[i].l;
    ev.G[i] = quad + quart + cross - power;
    ev.scale[i] = std::fabs(quad) + std::fabs(quart) + std::fabs(cross) + std::fabs(power);
    if (ev.scale[i] <= 0.0) ev.scale[i] = 1.0;
    ev.worst_relative = std::max(ev.worst_relative, std::fabs(ev.G[i]) / ev.scale[i]);
  }
  return ev;
}

// Jacobian of the scaling system (row-major dense):
//   ∂G_i/∂t_i = 2t_i n_i + 4b t_i³ d_i² + 2μb t_i d_i Σ_{j≠i} t_j² d_j − p t_i^{p-1} l_i
//   ∂G_i/∂t_j = 2μb t_i² t_j d_i d_j                                        (j ≠ i)
std::vector<double> eval_jacobian(const std::vector<ComponentSummary>& s,
                                  const std::vector<double>& t, double b, double p, double mu) {
  const std::size_t n = s.size();
  std::vector<double> J(n * n, 0.0);
  double coupling_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) coupling_total += t[j] * t[j] * s[j].d;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    const double others = coupling_total - ti * ti * s[i].d;
    J[i * n + i] = 2.0 * ti * s[i].n + 4.0 * b * ti * ti * ti * s[i].d * s[i].d +
                   2.0 * mu * b * ti * s[i].d * others - p * std::pow(ti, p - 1.0) * s[i].l;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      J[i * n + j] = 2.0 * mu * b * ti * ti * t[j] * s[i].d * s[j].d;
    }
  }
  return J;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Damped Newton on the scaling system at fixed μ. Returns false if the line
// search or the linear solver gives out before reaching tol (relative).
bool newton_at_mu(const std::vector<ComponentSummary>& s, double b, double p, double mu,
                  std::vector<double>& t, double tol, int max_iters, int& iterations_used) {
  const std::size_t n = s.size();
  SystemEval ev = eval_system(s, t, b, p, mu);
  for (int iter = 0; iter < max_iters; ++iter) {
    if (ev.worst_relative <= tol) return true;
    std::vector<double> J = eval_jacobian(s, t, b, p, mu);
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = -ev.G[i];
    if (!dense_solve(J, step, static_cast<int>(n))) return false;
    const double g0 = sup_norm(ev.G);
    double damping = 1.0;
    bool accepted = false;
    while (damping >= 1e-10) {
      std::vector<double> trial(n);
      bool positive = true;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = t[i] + damping * step[i];
        if (!(trial[i] > 0.0)) {
          positive = false;
          break;
        }
      }
      if (positive) {
        SystemEval trial_ev = eval_system(s, trial, b, p, mu);
        if (sup_norm(trial_ev.G) <= (1.0 - 1e-4 * damping) * g0) {
          t = trial;
          ev = std::move(trial_ev);
          accepted = true;
          break;
        }
      }
      damping *= 0.5;
    }
    ++iterations_used;
    if (!accepted) return false;
  }
  return ev.worst_relative <= tol;
}

}  // namespace

std::vector<ComponentSummary> summarize(const NodalCandidate& cand, const ProblemParams& params) {
  const EnergyBreakdown e = component_integrals(cand, params);
  std::vector<ComponentSummary> out(cand.comps.size());
  for (std::size_t i = 0; i < cand.comps.size(); ++i)
    out[i] = ComponentSummary{e.norm_sq[i], e.dirichlet[i], e.lp_mass[i]};
  return out;
}

double energy_from_summaries(const std::vector<ComponentSummary>& s, double b, double p) {
  double n_total = 0.0, d_total = 0.0, l_total = 0.0;
  for (const ComponentSummary& c : s) {
    n_total += c.n;
    d_total += c.d;
    l_total += c.l;
  }
  return 0.5 * n_total + 0.25 * b * d_total * d_total - l_total / p;
}

std::vector<ComponentSummary> scale_summaries(const std::vector<ComponentSummary>& s,
                                              const std::vector<double>& t, double p) {
  if (s.size() != t.size())
    throw SolverError("scaling tuple and summaries disagree on the number of components");
  std::vector<ComponentSummary> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t2 = t[i] * t[i];
    out[i] = ComponentSummary{t2 * s[i].n, t2 * s[i].d, std::pow(t[i], p) * s[i].l};
  }
  return out;
}

double fiber_h(const ComponentSummary& s, double b, double p, double t) {
  return s.n / (t * t) + b * s.d * s.d - s.l * std::pow(t, p - 4.0);
}

double fiber_threshold(const ComponentSummary& s, double p) {
  return std::pow(2.0 * s.n / ((4.0 - p) * s.l), 1.0 / (p - 2.0));
}

double fiber_h_at_threshold(const ComponentSummary& s, double b, double p) {
  const double ratio = std::pow(s.l / s.n, 2.0 / (p - 2.0));
  const double coeff = ((p - 2.0) / (4.0 - p)) * std::pow((4.0 - p) / 2.0, 2.0 / (p - 2.0));
  return b * s.d * s.d - coeff * s.n * ratio;
}

ScalarFiber scalar_fiber_solve(const ComponentSummary& s, double b, double p) {
  if (!(s.n > 0.0) || !(s.l > 0.0))
    throw SolverError("inadmissible b or degenerate component: zero norm or zero p-mass");
  ScalarFiber out;
  out.T = fiber_threshold(s, p);
  const double hT = fiber_h_at_threshold(s, b, p);
  if (!(hT < 0.0))
    throw SolverError(fmt("inadmissible b or degenerate component: the fibering map has no "
                          "interior maximum (h at the threshold = %.6e >= 0)",
                          hT));
  // h decreases from +inf through its unique root in (0, T): bisect, then polish.
  double lo = 1e-8 * out.T;
  double hi = out.T;
  while (!(fiber_h(s, b, p, lo) > 0.0)) lo *= 0.5;  // paranoia; h(0+) = +inf
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fiber_h(s, b, p, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  double t = 0.5 * (lo + hi);
  // Newton on g(t) = t²n + b t⁴ d² − t^p l (same root, better conditioned near it).
  for (int i = 0; i < 8; ++i) {
    const double g = t * t * s.n + b * t * t * t * t * s.d * s.d - std::pow(t, p) * s.l;
    const double dg =
        2.0 * t * s.n + 4.0 * b * t * t * t * s.d * s.d - p * std::pow(t, p - 1.0) * s.l;
    if (dg == 0.0) break;
    const double next = t - g / dg;
    if (!(next > 0.0) || !(next < out.T)) break;
    if (std::fabs(next - t) <= 1e-16 * t) {
      t = next;
      break;
    }
    t = next;
  }
  out.t = t;
  const double quad = t * t * s.n;
  const double quart = b * t * t * t * t * s.d * s.d;
  const double power = std::pow(t, p) * s.l;
  out.residual = std::fabs(quad + quart - power) / (quad + quart + power);
  if (out.residual > 1e-12)
    throw SolverError(fmt("scalar fibering solve did not converge (relative residual %.3e)",
                          out.residual));
  return out;
}

NehariProjection coupled_nehari_solve(const std::vector<ComponentSummary>& s, double b, double p,
                                      const CoupledSolveOpts& opts) {
  const std::size_t n = s.size();
  if (n == 0) throw SolverError("empty candidate: no components to project");
  for (std::size_t i = 0; i < n; ++i)
    if (!(s[i].n > 0.0) || !(s[i].l > 0.0))
      throw SolverError(fmt("component %zu is degenerate (zero norm or zero p-mass)", i));

  NehariProjection proj;
  proj.threshold.resize(n);
  for (std::size_t i = 0; i < n; ++i) proj.threshold[i] = fiber_threshold(s[i], p);

  std::vector<double> t;
  int iterations = 0;
  if (!opts.start.empty()) {
    if (opts.start.size() != n)
      throw SolverError("initial scaling guess has the wrong number of components");
    t = opts.start;
    for (double v : t)
      if (!(v > 0.0)) throw SolverError("initial scaling guess must be strictly positive");
    if (!newton_at_mu(s, b, p, 1.0, t, opts.newton_tol, opts.max_newton_iters, iterations))
      throw SolverError("scaling solve from the supplied start did not converge");
  } else {
    // Decoupled start: each component's own fibering maximum point.
    t.resize(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = scalar_fiber_solve(s[i], b, p).t;
    double mu = 0.0;
    double step = opts.mu_step;
    while (mu < 1.0) {
      const double target = std::min(1.0, mu + step);
      std::vector<double> trial = t;
      if (newton_at_mu(s, b, p, target, trial, opts.newton_tol, opts.max_newton_iters,
                       iterations)) {
        t = std::move(trial);
        mu = target;
      } else {
        step *= 0.5;
        if (step < opts.mu_step_floor)
          throw SolverError(fmt("homotopy stall at mu = %.6f: coupling continuation cannot "
                                "advance (step fell below %.1e)",
                                mu, opts.mu_step_floor));
      }
    }
  }

  proj.t = t;
  proj.mu = 1.0;
  proj.newton_iterations = iterations;
  const SystemEval ev = eval_system(s, t, b, p, 1.0);
  proj.residual.resize(n);
  proj.margin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    proj.residual[i] = std::fabs(ev.G[i]) / ev.scale[i];
    proj.margin[i] = 2.0 * t[i] * t[i] * s[i].n - (4.0 - p) * std::pow(t[i], p) * s[i].l;
    if (!(proj.margin[i] > 0.0))
      throw SolverError(fmt("scaling-maximum constraint violated: component %zu has margin "
                            "%.6e <= 0 (the scaled component is not a strict fibering maximum)",
                            i, proj.margin[i]));
  }
  return proj;
}

NehariProjection coupled_nehari_solve(const NodalCandidate& cand, const ProblemParams& params,
                                      const CoupledSolveOpts& opts) {
  return coupled_nehari_solve(summarize(cand, params), params.b, params.p, opts);
}

void apply_projection(NodalCandidate& cand, const NehariProjection& proj) {
  if (proj.t.size() != cand.comps.size())
    throw SolverError("projection and candidate disagree on the number of components");
  for (std::size_t i = 0; i < cand.comps.size(); ++i)
    for (double& v : cand.comps[i]) v *= proj.t[i];
}

NehariProjection project_if_dominating(const std::vector<ComponentSummary>& s, double b,
                                       double p) {
  const std::size_t n = s.size();
  double d_total = 0.0;
  for (const ComponentSummary& c : s) d_total += c.d;
  for (std::size_t i = 0; i < n; ++i) {
    const double lhs = (4.0 - p) * s[i].l;
    const double rhs = 2.0 * s[i].n;
    if (!(lhs < rhs))
      throw SolverError(fmt("dominance precondition violated for component %zu: "
                            "(4-p)*p-mass = %.6e must stay below 2*norm^2 = %.6e",
                            i, lhs, rhs));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double F = s[i].n + b * s[i].d * s[i].d + b * s[i].d * (d_total - s[i].d) - s[i].l;
    if (F > 0.0)
      throw SolverError(fmt("dominance precondition violated for component %zu: the unscaled "
                            "component must sit beyond its fibering maximum (F = %.6e > 0)",
                            i, F));
  }
  NehariProjection proj = coupled_nehari_solve(s, b, p);
  for (std::size_t i = 0; i < n; ++i) {
    if (proj.t[i] > 1.0 + 1e-9)
      throw SolverError(fmt("dominated candidate scaled outward: t_%zu = %.12f > 1 contradicts "
                            "the box property of the projection",
                            i, proj.t[i]));
    proj.t[i] = std::min(proj.t[i], 1.0);
  }
  return proj;
}

NehariProjection project_if_dominating(const NodalCandidate& cand, const ProblemParams& params) {
  return project_if_dominating(summarize(cand, params), params.b, params.p);
}

double alpha_k_lower_bound(double p, int k, double S_p) {
  return (k + 1) * ((p - 2.0) / (4.0 * p)) * std::pow(S_p, p / (p - 2.0));
}

AdmissibilityReport admissibility(const ProblemParams& params,
                                  const std::vector<ComponentSummary>& s, double S_p,
                                  double alpha_k_estimate) {
  const double p = params.p;
  const int k = static_cast<int>(s.size()) - 1;
  AdmissibilityReport rep;
  const double base = ((p - 2.0) / (4.0 - p)) * std::pow((4.0 - p) / 2.0, 2.0 / (p - 2.0)) *
                      std::pow(2.0 * S_p, -p / (p - 2.0));
  const double crowding =
      1.0 + k * std::pow(2.0, 2.0 / (p - 2.0)) * std::pow(2.0 / (4.0 - p), 2.0 / (p - 2.0));
  rep.b_hat = base / crowding;
  rep.b_small = std::min(base, rep.b_hat);
  rep.alpha_k_prior = alpha_k_lower_bound(p, k, S_p);
  rep.alpha_k_used = alpha_k_estimate > 0.0 ? alpha_k_estimate : rep.alpha_k_prior;
  const double level_cap =
      (p - 2.0) * (p - 2.0) / (8.0 * p * (4.0 - p) * rep.alpha_k_used);
  rep.b_star = std::min(rep.b_small, level_cap);
  rep.precondition_floor = 1.0 / (2.0 * S_p);
  rep.precondition.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    rep.precondition[i] = std::pow(s[i].l, 2.0 / p) / s[i].n;
  rep.verdict = params.b < rep.b_star;
  return rep;
}

DominanceCertificates dominance_certificates(const std::vector<ComponentSummary>& s,
                                             const NehariProjection& proj, double b, double p) {
  const std::size_t n = s.size();
  const double mu = proj.mu;
  DominanceCertificates cert;
  cert.scaling_row_sums.assign(n, 0.0);
  cert.manifold_row_sums.assign(n, 0.0);

  // Scaling-system certificate: the rescaled Jacobian with entries
  //   M_ii = −(4-p) t_i^p l_i + 2 t_i² n_i + 2μb t_i² d_i Σ_{j≠i} t_j² d_j,
  //   M_ij = −2μb t_i² t_j² d_i d_j,
  // assembled literally and summed along each row.
  double coupling_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) coupling_total += proj.t[j] * proj.t[j] * s[j].d;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti2 = proj.t[i] * proj.t[i];
    const double others = coupling_total - ti2 * s[i].d;
    double row = -(4.0 - p) * std::pow(proj.t[i], p) * s[i].l + 2.0 * ti2 * s[i].n +
                 2.0 * mu * b * ti2 * s[i].d * others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row += -2.0 * mu * b * ti2 * proj.t[j] * proj.t[j] * s[i].d * s[j].d;
    }
    cert.scaling_row_sums[i] = row;
  }

  // Manifold certificate at the scaled components v_i = t_i u_i
  // (n' = t²n, d' = t²d, l' = t^p l):
  //   N_ii = 2n'_i + 4b d'_i² + 2b d'_i Σ_{j≠i} d'_j − p l'_i,  N_ij = 2b d'_i d'_j.
  std::vector<double> ns(n), ds(n), ls(n);
  double d_scaled_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti2 = proj.t[i] * proj.t[i];
    ns[i] = ti2 * s[i].n;
    ds[i] = ti2 * s[i].d;
    ls[i] = std::pow(proj.t[i], p) * s[i].l;
    d_scaled_total += ds[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double others = d_scaled_total - ds[i];
    double row = 2.0 * ns[i] + 4.0 * b * ds[i] * ds[i] + 2.0 * b * ds[i] * others - p * ls[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row += 2.0 * b * ds[i] * ds[j];
    }
    cert.manifold_row_sums[i] = row;
  }

  cert.scaling_all_positive = true;
  cert.manifold_all_negative = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cert.scaling_row_sums[i] > 0.0)) cert.scaling_all_positive = false;
    if (!(cert.manifold_row_sums[i] < 0.0)) cert.manifold_all_negative = false;
  }
  return cert;
}

}  // namespace knodal
