#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "outer.hpp"
#include "problem.hpp"

namespace knodal {

// Thrown on malformed or invalid configuration; the message carries every
// violation found, one per line, each naming the key, the given value, and
// the violated constraint.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshSettings {
  MeshSpec spec;                // cells_per_annulus (≥ 4 for runs), grading
  int refinement_levels = 1;    // 1 = solve on the base grid only
};

struct SolverSettings {
  double newton_tol = 1e-10;  // scaling-system residual at acceptance
  double inner_tol = 1e-6;    // free-gradient dual norm, relative
  double outer_tol = 1e-4;    // simplex diameter in radii space, × R
  double polish_tol = 1e-8;   // glued-field residual, relative
  int max_inner_iters = 2000;
  int max_outer_evals = 400;
  int restarts = 3;
  std::uint64_t seed = 12345;
};

struct OutputSettings {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};
};

struct RunConfig {
  ProblemParams problem;
  MeshSettings mesh;
  SolverSettings solver;
  OutputSettings output;
  std::string potential_source = "constant:1";  // the grammar form that built the potential
  std::string potential_table_text;  // raw table file contents (empty for constant form)
};

// Structured text: `key = value` lines under `[section]` headers (problem,
// mesh, solver, output); '#' starts a comment. Unknown sections or keys are
// errors; all violations are collected before throwing. `base_dir` anchors
// relative table-potential paths.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
RunConfig parse_config_file(const std::string& path);

// Canonical echo with every key explicit; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Potential grammar: "constant:<v>" or "table:<file>". The table file holds
// `t,v` or whitespace-separated rows, strictly increasing t starting at 0.
// `table_text`, when given, receives the raw file contents so archives can
// carry the table along.
Potential parse_potential(const std::string& source, const std::string& base_dir,
                          std::vector<std::string>& errors,
                          std::string* table_text = nullptr);

// Solver blocks mapped onto the outer/inner option structs.
OuterSolveOpts outer_opts_from(const RunConfig& cfg);

}  // namespace knodal
