#include "archive.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oracles/multistart_oracle.hpp"
#include "rng.hpp"

namespace knodal {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

// JSON cells: null → empty, numbers → 17 significant digits, exact strings
std::string cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return fmt17(v.get<double>());
  if (v.is_string()) return csv_escape(v.get<std::string>());
  return csv_escape(v.dump());
}

ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson jvec(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

ojson jstrings(const std::vector<std::string>& v) {
  ojson a = ojson::array();
  for (const std::string& x : v) a.push_back(x);
  return a;
}

// Echo the configuration into the archive; table potentials are copied in so
// the directory stands on its own.
RunConfig stage_config(RunArchive& ar, const RunConfig& cfg) {
  RunConfig echo = cfg;
  if (!cfg.potential_table_text.empty()) {
    ar.put("potential.csv", cfg.potential_table_text);
    echo.potential_source = "table:potential.csv";
  }
  ar.put("config.ini", serialize_config(echo));
  return echo;
}

ojson base_summary(const RunConfig& cfg, const char* pipeline) {
  ojson s;
  s["tool"] = ojson{{"name", kToolName}, {"version", kToolVersion}};
  s["pipeline"] = pipeline;
  s["seed"] = cfg.solver.seed;
  s["problem"] = ojson{{"b", jnum(cfg.problem.b)},
                       {"p", jnum(cfg.problem.p)},
                       {"potential", cfg.potential_source},
                       {"R", jnum(cfg.problem.R)},
                       {"mode", mode_name(cfg.problem.mode)},
                       {"k", cfg.problem.k}};
  s["mesh"] = ojson{{"cells_per_annulus", cfg.mesh.spec.cells_per_annulus},
                    {"grading", cfg.mesh.spec.grading.describe()},
                    {"refinement_levels", cfg.mesh.refinement_levels}};
  return s;
}

ojson projection_json(const NehariProjection& proj) {
  return ojson{{"t", jvec(proj.t)},
               {"mu", jnum(proj.mu)},
               {"residual", jvec(proj.residual)},
               {"margin", jvec(proj.margin)},
               {"threshold", jvec(proj.threshold)},
               {"newton_iterations", proj.newton_iterations}};
}

ojson certificates_json(const DominanceCertificates& c) {
  return ojson{{"scaling_row_sums", jvec(c.scaling_row_sums)},
               {"manifold_row_sums", jvec(c.manifold_row_sums)},
               {"scaling_all_positive", c.scaling_all_positive},
               {"manifold_all_negative", c.manifold_all_negative}};
}

ojson junction_rows(const std::vector<JunctionJump>& jumps) {
  ojson rows = ojson::array();
  for (const JunctionJump& j : jumps)
    rows.push_back(ojson{{"r", jnum(j.r)},
                         {"left_slope", jnum(j.left_slope)},
                         {"right_slope", jnum(j.right_slope)},
                         {"jump", jnum(j.jump)}});
  return rows;
}

void table_from(const ojson& s, RunArchive& ar, const char* key, const char* file,
                const std::vector<const char*>& cols, bool always) {
  if (!always && !s.contains(key)) return;
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i > 0) out += ",";
    out += cols[i];
  }
  out += "\n";
  if (s.contains(key)) {
    for (const ojson& row : s.at(key)) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i > 0) out += ",";
        out += cell(row.contains(cols[i]) ? row.at(cols[i]) : ojson(nullptr));
      }
      out += "\n";
    }
  }
  ar.put(file, out);
}

void finish(RunReport& rep, const ojson& s) {
  rep.archive.put("summary.json", s.dump(2) + "\n");
  export_tables(rep.archive);
}

double min_of(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return m;
}

bool all_positive(const std::vector<double>& v) {
  for (double x : v)
    if (!(x > 0.0)) return false;
  return !v.empty();
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

// --- RunArchive ------------------------------------------------------------------

void RunArchive::put(std::string name, std::string contents) {
  files_[std::move(name)] = std::move(contents);
}

bool RunArchive::has(const std::string& name) const { return files_.count(name) > 0; }

const std::string& RunArchive::get(const std::string& name) const {
  auto it = files_.find(name);
  if (it == files_.end()) throw ArchiveError("archive holds no file named " + name);
  return it->second;
}

std::vector<std::string> RunArchive::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : files_) out.push_back(name);
  return out;
}

void RunArchive::commit(const std::string& directory, bool force) const {
  const fs::path target(directory);
  std::error_code ec;
  const bool exists = fs::exists(target, ec);
  if (exists && !force)
    throw ArchiveError("output directory " + directory +
                       " already exists (pass --force to replace it)");
  fs::path parent = target.parent_path();
  if (parent.empty()) parent = ".";
  static std::atomic<unsigned> counter{0};
  const fs::path tmp =
      parent / (".stage-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)) + "-" + target.filename().string());
  try {
    fs::create_directories(parent);
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    for (const auto& [name, contents] : files_) {
      std::ofstream out(tmp / name, std::ios::binary);
      out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      out.close();
      if (!out) {
        fs::remove_all(tmp);
        throw ArchiveError("cannot write " + (tmp / name).string());
      }
    }
    if (exists) fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw ArchiveError(std::string("archive commit failed: ") + e.what());
  }
}

RunArchive RunArchive::load(const std::string& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec))
    throw ArchiveError("no archive directory at " + directory);
  RunArchive ar;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw ArchiveError("cannot read " + entry.path().string());
    ar.files_[entry.path().filename().string()] = buf.str();
  }
  return ar;
}

// --- field serialization -----------------------------------------------------------

std::string profile_table(const RadialMesh& m, const std::vector<double>& u,
                          std::size_t annulus) {
  std::string out = "# annulus " + std::to_string(annulus + 1) + "/" +
                    std::to_string(m.annulus_count()) + ": [" + fmt17(m.radii[annulus]) +
                    ", " + fmt17(m.radii[annulus + 1]) + "]\n";
  out += "t,u\n";
  for (std::size_t j = m.first_node(annulus); j <= m.last_node(annulus); ++j)
    out += fmt17(m.nodes[j]) + "," + fmt17(u[j]) + "\n";
  return out;
}

std::string glued_table(const RadialMesh& m, const std::vector<double>& u) {
  std::string out = "# annuli " + std::to_string(m.annulus_count()) + ", junctions: [";
  for (std::size_t i = 0; i < m.radii.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt17(m.radii[i]);
  }
  out += "]\nt,u\n";
  for (std::size_t j = 0; j < m.node_count(); ++j)
    out += fmt17(m.nodes[j]) + "," + fmt17(u[j]) + "\n";
  return out;
}

ParsedProfile parse_profile_table(const std::string& text) {
  ParsedProfile p;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      unsigned long ai = 0, an = 0;
      double a = 0.0, b = 0.0;
      if (std::sscanf(t.c_str(), "# annulus %lu/%lu: [%lf, %lf]", &ai, &an, &a, &b) == 4 &&
          ai >= 1) {
        p.annulus = ai - 1;
        p.annuli = an;
        p.r_left = a;
        p.r_right = b;
        have_header = true;
      }
      continue;
    }
    if (t == "t,u") continue;
    const std::size_t comma = t.find(',');
    if (comma == std::string::npos)
      throw ArchiveError("profile row is not `t,u`: " + t);
    char* end = nullptr;
    const std::string ts = t.substr(0, comma), us = t.substr(comma + 1);
    const double tv = std::strtod(ts.c_str(), &end);
    if (end == ts.c_str()) throw ArchiveError("profile row is not `t,u`: " + t);
    const double uv = std::strtod(us.c_str(), &end);
    if (end == us.c_str()) throw ArchiveError("profile row is not `t,u`: " + t);
    p.t.push_back(tv);
    p.u.push_back(uv);
  }
  if (!have_header)
    throw ArchiveError("profile table is missing its annulus header");
  if (p.t.size() < 2) throw ArchiveError("profile table holds fewer than two rows");
  return p;
}

NodalCandidate candidate_from_profiles(const std::vector<ParsedProfile>& comps) {
  if (comps.empty()) throw ArchiveError("no component profiles to reassemble");
  const std::size_t n = comps.size();
  std::vector<const ParsedProfile*> by_index(n, nullptr);
  for (const ParsedProfile& c : comps) {
    if (c.annuli != n || c.annulus >= n || by_index[c.annulus] != nullptr)
      throw ArchiveError("component profiles do not form one complete run");
    by_index[c.annulus] = &c;
  }
  auto mesh = std::make_shared<RadialMesh>();
  mesh->radii.push_back(by_index[0]->r_left);
  for (std::size_t i = 0; i < n; ++i) {
    if (by_index[i]->r_left != mesh->radii.back())
      throw ArchiveError("junction radii disagree between component profiles");
    mesh->radii.push_back(by_index[i]->r_right);
  }
  mesh->nodes = by_index[0]->t;
  mesh->junction = {0, mesh->nodes.size() - 1};
  for (std::size_t i = 1; i < n; ++i) {
    if (by_index[i]->t.front() != mesh->nodes.back())
      throw ArchiveError("junction nodes disagree between component profiles");
    mesh->nodes.insert(mesh->nodes.end(), by_index[i]->t.begin() + 1, by_index[i]->t.end());
    mesh->junction.push_back(mesh->nodes.size() - 1);
  }
  for (std::size_t j = 1; j < mesh->nodes.size(); ++j)
    if (!(mesh->nodes[j] > mesh->nodes[j - 1]))
      throw ArchiveError("profile nodes are not strictly increasing");
  mesh->spec.cells_per_annulus = static_cast<int>(by_index[0]->t.size()) - 1;

  NodalCandidate cand;
  cand.mesh = mesh;
  cand.comps.assign(n, std::vector<double>(mesh->node_count(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = mesh->first_node(i);
    for (std::size_t j = 0; j < by_index[i]->u.size(); ++j)
      cand.comps[i][lo + j] = by_index[i]->u[j];
  }
  enforce_support(cand);
  return cand;
}

// --- standard tables ----------------------------------------------------------------

void export_tables(RunArchive& ar) {
  ojson s;
  if (ar.has("summary.json")) s = ojson::parse(ar.get("summary.json"));
  table_from(s, ar, "energies", "energies.csv",
             {"k", "energy", "sign_changes", "margin_min", "step_margin", "fold_margin"},
             true);
  table_from(s, ar, "junctions", "junctions.csv",
             {"r", "left_slope", "right_slope", "jump"}, true);
  table_from(s, ar, "bounds_rows", "bounds.csv", {"quantity", "value", "floor", "pass"},
             true);
  table_from(s, ar, "blimit", "blimit.csv",
             {"b", "distance", "energy", "sign_changes", "solved", "note"}, true);
  table_from(s, ar, "pohozaev_rows", "pohozaev.csv",
             {"level", "cells_per_annulus", "gradient_term", "potential_term",
              "potential_radial", "kirchhoff_term", "nonlinear_term", "boundary_flux",
              "residual", "relative", "combination_relative", "membership_residual",
              "maximum_margin", "strict_membership"},
             false);
  table_from(s, ar, "sobolev_history", "sp.csv", {"iteration", "quotient"}, false);
  table_from(s, ar, "nehari_rows", "nehari_check.csv",
             {"component", "t", "margin", "threshold", "t_oracle"}, false);
}

// --- pipelines ------------------------------------------------------------------------

RunReport run_solve(const RunConfig& cfg) {
  const ProblemParams& params = cfg.problem;
  const OuterSolveOpts opts = outer_opts_from(cfg);
  PolishOpts pol;
  pol.tol = cfg.solver.polish_tol;
  const SolveOutcome out = solve_nodal(params.k, params, opts, pol);

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  const RadialMesh& m = *out.outer.mesh;
  const NodalCandidate& cand = out.outer.inner.minimizer;
  for (std::size_t i = 0; i < cand.comps.size(); ++i)
    rep.archive.put("component_" + std::to_string(i) + ".csv",
                    profile_table(m, cand.comps[i], i));
  rep.archive.put("glued.csv", glued_table(m, out.glued.u));

  const std::vector<ComponentSummary> summaries = summarize(cand, params);
  const DominanceCertificates certs =
      dominance_certificates(summaries, out.outer.inner.projection, params.b, params.p);

  ojson s = base_summary(echo, "solve");
  s["solve"] = ojson{
      {"energy", jnum(out.glued.energy)},
      {"energy_raw", jnum(out.glued.energy_raw)},
      {"sign_changes", out.glued.sign_changes},
      {"radii", jvec(out.outer.radii)},
      {"phi_value", jnum(out.outer.phi_value)},
      {"evaluations", out.outer.evaluations},
      {"simplex_diameter", jnum(out.outer.simplex_diameter)},
      {"residual", jnum(out.glued.residual)},
      {"residual_raw", jnum(out.glued.residual_raw)},
      {"max_relative_jump", jnum(out.glued.max_rel_jump)},
      {"polish",
       ojson{{"iterations", out.glued.polish_iterations},
             {"converged", out.glued.polish_converged}}},
      {"projection", projection_json(out.outer.inner.projection)},
      {"nodal_margins", jvec(out.glued.nodal_margins)},
      {"certificates", certificates_json(certs)},
      {"inner", ojson{{"status", inner_status_name(out.outer.inner.status)},
                      {"iterations", out.outer.inner.iterations},
                      {"energy", jnum(out.outer.inner.energy)},
                      {"residual", jnum(out.outer.inner.residual)},
                      {"free_vs_tangential", jnum(out.outer.inner.free_vs_tangential)},
                      {"warnings", jstrings(out.outer.inner.warnings)}}}};

  ojson erow;
  erow["k"] = params.k;
  erow["energy"] = jnum(out.glued.energy);
  erow["sign_changes"] = out.glued.sign_changes;
  erow["margin_min"] = jnum(min_of(out.outer.inner.projection.margin));
  erow["step_margin"] = nullptr;
  erow["fold_margin"] = nullptr;
  s["energies"] = ojson::array({erow});
  s["junctions"] = junction_rows(out.glued.jumps);

  const bool sign_ok = out.glued.sign_changes == params.k;
  const bool residual_ok = out.glued.residual <= cfg.solver.inner_tol;
  const bool margins_ok = all_positive(out.outer.inner.projection.margin) &&
                          all_positive(out.glued.nodal_margins);
  const bool certs_ok = certs.scaling_all_positive && certs.manifold_all_negative;
  rep.verdict_pass = sign_ok && residual_ok && margins_ok && certs_ok;
  s["verdicts"] = ojson{{"sign_count", sign_ok},
                        {"residual", residual_ok},
                        {"margins", margins_ok},
                        {"certificates", certs_ok},
                        {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_verify_monotonicity(const RunConfig& cfg, int k_max) {
  if (k_max < 1)
    throw ConfigError("kmax = " + std::to_string(k_max) +
                      ": the energy ordering needs at least two levels (kmax >= 1)");
  const ProblemParams& params = cfg.problem;
  const OuterSolveOpts opts = outer_opts_from(cfg);
  const MonotonicityReport report = verify_monotonicity(k_max, params, opts);

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  ojson s = base_summary(echo, "verify-monotonicity");

  ojson rows = ojson::array();
  ojson erows = ojson::array();
  for (const MonotonicityRow& r : report.rows) {
    const bool margins_apply = r.solved && r.k != 0;
    rows.push_back(ojson{{"k", r.k},
                         {"solved", r.solved},
                         {"note", r.note},
                         {"energy", r.solved ? jnum(r.energy) : ojson(nullptr)},
                         {"sign_changes", r.solved ? ojson(r.sign_changes) : ojson(nullptr)},
                         {"step_margin", margins_apply ? jnum(r.step_margin) : ojson(nullptr)},
                         {"fold_margin", margins_apply ? jnum(r.fold_margin) : ojson(nullptr)},
                         {"radii", jvec(r.radii)}});
    if (!r.solved) continue;  // flagged in the summary; no energy row to tabulate
    ojson erow;
    erow["k"] = r.k;
    erow["energy"] = jnum(r.energy);
    erow["sign_changes"] = r.sign_changes;
    erow["margin_min"] = nullptr;
    erow["step_margin"] = r.k == 0 ? ojson(nullptr) : jnum(r.step_margin);
    erow["fold_margin"] = r.k == 0 ? ojson(nullptr) : jnum(r.fold_margin);
    erows.push_back(erow);
  }
  s["monotonicity"] = ojson{{"rows", rows},
                            {"margin_floor", jnum(report.margin_floor)},
                            {"verdict", report.verdict}};
  s["energies"] = erows;
  rep.verdict_pass = report.verdict;
  s["verdicts"] = ojson{{"energy_ordering", report.verdict}, {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_verify_pohozaev(const RunConfig& cfg) {
  ProblemParams params = cfg.problem;
  params.k = 0;  // the identity is checked on the positive ground state
  const OuterSolveOpts opts = outer_opts_from(cfg);
  PolishOpts pol;
  pol.tol = cfg.solver.polish_tol;
  const SolveOutcome out = solve_nodal(0, params, opts, pol);

  auto make_row = [](int level, int cells, const PohozaevReport& r) {
    return ojson{{"level", level},
                 {"cells_per_annulus", cells},
                 {"gradient_term", jnum(r.gradient_term)},
                 {"potential_term", jnum(r.potential_term)},
                 {"potential_radial", jnum(r.potential_radial)},
                 {"kirchhoff_term", jnum(r.kirchhoff_term)},
                 {"nonlinear_term", jnum(r.nonlinear_term)},
                 {"boundary_flux", jnum(r.boundary_flux)},
                 {"residual", jnum(r.residual)},
                 {"relative", jnum(r.relative)},
                 {"combination_relative", jnum(r.combination_relative)},
                 {"membership_residual", jnum(r.membership_residual)},
                 {"maximum_margin", jnum(r.maximum_margin)},
                 {"strict_membership", r.strict_membership}};
  };

  ojson rows = ojson::array();
  const PohozaevReport first = pohozaev_report(*out.outer.mesh, out.glued.u, params);
  rows.push_back(make_row(0, cfg.mesh.spec.cells_per_annulus, first));
  std::vector<double> relatives{first.relative};
  bool strict_all = first.strict_membership;

  MeshSpec spec = cfg.mesh.spec;
  NodalCandidate warm = out.outer.inner.minimizer;
  for (int level = 1; level < std::max(1, cfg.mesh.refinement_levels); ++level) {
    spec.cells_per_annulus *= 2;
    std::shared_ptr<const RadialMesh> fine;
    InnerSolveResult inner =
        inner_on_radii(out.outer.radii, params, opts.inner, spec, &warm, &fine);
    OuterSolveResult refined;
    refined.radii = out.outer.radii;
    refined.mesh = fine;
    refined.inner = inner;
    refined.phi_value = inner.energy;
    const GluedSolution glued = glue_and_polish(refined, params, pol);
    const PohozaevReport r = pohozaev_report(*fine, glued.u, params);
    rows.push_back(make_row(level, spec.cells_per_annulus, r));
    relatives.push_back(r.relative);
    strict_all = strict_all && r.strict_membership;
    warm = inner.minimizer;
  }

  bool shrinking = true;
  for (std::size_t i = 1; i < relatives.size(); ++i)
    shrinking = shrinking && relatives[i] < relatives[i - 1];
  const bool tail_ok = relatives.back() <= 1e-2;

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  ojson s = base_summary(echo, "verify-pohozaev");
  s["pohozaev_rows"] = rows;
  s["pohozaev"] = ojson{{"levels", static_cast<int>(relatives.size())},
                        {"relative_final", jnum(relatives.back())},
                        {"shrinking", shrinking},
                        {"strict_membership", strict_all}};
  rep.verdict_pass = tail_ok && shrinking && strict_all;
  s["verdicts"] = ojson{{"identity_residual", tail_ok},
                        {"residual_shrinks", shrinking},
                        {"strict_membership", strict_all},
                        {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_verify_bounds(const RunConfig& cfg) {
  const ProblemParams& params = cfg.problem;
  const OuterSolveOpts opts = outer_opts_from(cfg);

  const RadialMesh sm = build_mesh({0.0, params.R}, cfg.mesh.spec);
  const SobolevConstants sc =
      estimate_S_q(sm, params, params.p, substream_seed(cfg.solver.seed, "bounds-sp"), 5);

  PolishOpts pol;
  pol.tol = cfg.solver.polish_tol;
  const SolveOutcome out = solve_nodal(params.k, params, opts, pol);
  const double delta = 0.02;
  const BoundsReport br = check_bounds(out, params, sc.value, delta);

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  ojson s = base_summary(echo, "verify-bounds");
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < br.component_norms.size(); ++i) {
    const double floor = (1.0 - delta) * br.norm_floor;
    rows.push_back(ojson{{"quantity", "component_norm_" + std::to_string(i)},
                         {"value", jnum(br.component_norms[i])},
                         {"floor", jnum(floor)},
                         {"pass", br.component_norms[i] >= floor}});
  }
  {
    const double floor = (1.0 - delta) * br.alpha_floor;
    rows.push_back(ojson{{"quantity", "alpha_k"},
                         {"value", jnum(br.alpha_k)},
                         {"floor", jnum(floor)},
                         {"pass", br.alpha_k >= floor}});
  }
  s["bounds_rows"] = rows;
  s["bounds"] = ojson{{"S_p", jnum(br.S_p)},
                      {"delta", jnum(br.delta)},
                      {"norm_floor", jnum(br.norm_floor)},
                      {"alpha_k", jnum(br.alpha_k)},
                      {"alpha_floor", jnum(br.alpha_floor)},
                      {"sobolev_restart_spread", jnum(sc.restarts_agreement)},
                      {"verdict", br.verdict}};
  rep.verdict_pass = br.verdict;
  s["verdicts"] = ojson{{"lower_bounds", br.verdict}, {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_sweep_b(const RunConfig& cfg, const std::vector<double>& b_list) {
  if (b_list.empty())
    throw ConfigError("blist is empty: the coupling sweep needs at least one b value");
  for (double b : b_list)
    if (!(b >= 0.0))
      throw ConfigError("blist entry " + std::to_string(b) +
                        ": coupling values must be nonnegative");
  const ProblemParams& params = cfg.problem;
  const OuterSolveOpts opts = outer_opts_from(cfg);
  const LimitStudy study = sweep_b(params.k, b_list, params, opts);

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  ojson s = base_summary(echo, "sweep-b");
  ojson rows = ojson::array();
  for (const LimitRow& r : study.rows)
    rows.push_back(ojson{{"b", jnum(r.b)},
                         {"distance", jnum(r.distance)},
                         {"energy", jnum(r.energy)},
                         {"sign_changes", r.sign_changes},
                         {"solved", r.solved},
                         {"note", r.note}});
  s["blimit"] = rows;
  s["sweep"] = ojson{{"radii", jvec(study.radii)},
                     {"energy_limit", jnum(study.energy_limit)},
                     {"sign_changes_limit", study.sign_changes_limit},
                     {"distances_decreasing", study.distances_decreasing},
                     {"signs_constant", study.signs_constant},
                     {"energies_decreasing", study.energies_decreasing}};
  rep.verdict_pass =
      study.distances_decreasing && study.signs_constant && study.energies_decreasing;
  s["verdicts"] = ojson{{"distances_decreasing", study.distances_decreasing},
                        {"signs_constant", study.signs_constant},
                        {"energies_decreasing", study.energies_decreasing},
                        {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_sp_estimate(const RunConfig& cfg, double q) {
  if (!(q >= 2.0 && q <= 6.0))
    throw ConfigError("q = " + std::to_string(q) +
                      ": the embedding exponent must lie in [2, 6]");
  const ProblemParams& params = cfg.problem;
  const RadialMesh m = build_mesh({0.0, params.R}, cfg.mesh.spec);
  const SobolevConstants sc =
      estimate_S_q(m, params, q, substream_seed(cfg.solver.seed, "sp-estimate"), 5);

  RunReport rep;
  const RunConfig echo = stage_config(rep.archive, cfg);
  ojson s = base_summary(echo, "sp-estimate");
  ojson history = ojson::array();
  for (std::size_t i = 0; i < sc.quotient_history.size(); ++i)
    history.push_back(
        ojson{{"iteration", static_cast<int>(i)}, {"quotient", jnum(sc.quotient_history[i])}});
  s["sobolev_history"] = history;
  s["sobolev"] = ojson{{"q", jnum(sc.q)},
                       {"value", jnum(sc.value)},
                       {"iterations", sc.iterations},
                       {"restarts", sc.restarts},
                       {"restarts_agreement", jnum(sc.restarts_agreement)}};
  rep.verdict_pass = sc.value > 0.0 && sc.restarts_agreement <= 1e-6;
  s["verdicts"] = ojson{{"restarts_agree", sc.restarts_agreement <= 1e-6},
                        {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

RunReport run_nehari_check(const std::string& archive_dir, bool with_oracle) {
  const RunArchive src = RunArchive::load(archive_dir);
  if (!src.has("config.ini"))
    throw ArchiveError("archive at " + archive_dir + " has no config.ini");
  const RunConfig cfg = parse_config_text(src.get("config.ini"), archive_dir);
  const ProblemParams& params = cfg.problem;

  std::vector<ParsedProfile> profs;
  for (std::size_t i = 0;; ++i) {
    const std::string name = "component_" + std::to_string(i) + ".csv";
    if (!src.has(name)) break;
    profs.push_back(parse_profile_table(src.get(name)));
  }
  if (profs.empty())
    throw ArchiveError("archive at " + archive_dir + " holds no component profiles");
  const NodalCandidate cand = candidate_from_profiles(profs);
  const std::vector<ComponentSummary> summ = summarize(cand, params);

  CoupledSolveOpts copts;
  copts.start.assign(summ.size(), 1.0);
  copts.newton_tol = cfg.solver.newton_tol;
  const NehariProjection proj = coupled_nehari_solve(summ, params.b, params.p, copts);
  const DominanceCertificates certs =
      dominance_certificates(summ, proj, params.b, params.p);

  double max_dev = 0.0;
  for (double t : proj.t) max_dev = std::max(max_dev, std::fabs(t - 1.0));

  std::vector<double> t_oracle;
  double agreement = 0.0;
  std::string oracle_note;
  if (with_oracle) {
    std::vector<oracle::TripleSummary> ts;
    for (const ComponentSummary& c : summ) ts.push_back({c.n, c.d, c.l});
    try {
      const oracle::MultistartReport mr = oracle::nehari_multistart(ts, params.b, params.p);
      t_oracle = mr.t;
      for (std::size_t i = 0; i < proj.t.size(); ++i)
        agreement =
            std::max(agreement, std::fabs(proj.t[i] - t_oracle[i]) / std::fabs(proj.t[i]));
    } catch (const std::exception& e) {
      oracle_note = e.what();
    }
  }

  RunReport rep;
  rep.archive.put("config.ini", src.get("config.ini"));
  if (src.has("potential.csv")) rep.archive.put("potential.csv", src.get("potential.csv"));
  ojson s = base_summary(cfg, "nehari-check");
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < proj.t.size(); ++i)
    rows.push_back(ojson{{"component", static_cast<int>(i)},
                         {"t", jnum(proj.t[i])},
                         {"margin", jnum(proj.margin[i])},
                         {"threshold", jnum(proj.threshold[i])},
                         {"t_oracle", i < t_oracle.size() ? jnum(t_oracle[i]) : ojson(nullptr)}});
  s["nehari_rows"] = rows;

  const bool on_manifold = max_dev <= 1e-6;
  const bool margins_ok = all_positive(proj.margin);
  const bool certs_ok = certs.scaling_all_positive && certs.manifold_all_negative;
  const bool oracle_ok =
      !with_oracle || (oracle_note.empty() && !t_oracle.empty() && agreement <= 1e-8);
  s["nehari_check"] = ojson{{"source", archive_dir},
                            {"max_unit_deviation", jnum(max_dev)},
                            {"oracle_agreement", with_oracle ? jnum(agreement) : ojson(nullptr)},
                            {"oracle_note", oracle_note},
                            {"certificates", certificates_json(certs)}};
  rep.verdict_pass = on_manifold && margins_ok && certs_ok && oracle_ok;
  s["verdicts"] = ojson{{"on_manifold", on_manifold},
                        {"margins", margins_ok},
                        {"certificates", certs_ok},
                        {"oracle", oracle_ok},
                        {"pass", rep.verdict_pass}};
  finish(rep, s);
  return rep;
}

}  // namespace knodal
