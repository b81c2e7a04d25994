#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"

namespace knodal {

inline constexpr const char* kToolName = "knodal";
inline constexpr const char* kToolVersion = "1.0.0";

// Persistence failures: unwritable targets, refusal to replace an existing
// output directory, malformed archives on reload.
struct ArchiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits; every emitted number re-parses to the same double.
std::string fmt17(double v);

// A run's files, staged in memory and written in one atomic move: the
// contents land in a temporary directory next to the target, which is then
// renamed into place. An interrupted run leaves nothing at the final path.
class RunArchive {
 public:
  void put(std::string name, std::string contents);
  bool has(const std::string& name) const;
  const std::string& get(const std::string& name) const;  // throws ArchiveError when absent
  std::vector<std::string> names() const;

  // Refuses an existing directory unless force is set (then replaces it).
  void commit(const std::string& directory, bool force) const;
  static RunArchive load(const std::string& directory);

 private:
  std::map<std::string, std::string> files_;
};

// --- field serialization -------------------------------------------------------
// One component over its annulus: a header naming the annulus and its radii,
// then columnar t,u rows.
std::string profile_table(const RadialMesh& m, const std::vector<double>& u,
                          std::size_t annulus);
// The full glued field with the junction radii in the header.
std::string glued_table(const RadialMesh& m, const std::vector<double>& u);

struct ParsedProfile {
  std::size_t annulus = 0;  // 0-based
  std::size_t annuli = 1;
  double r_left = 0.0;
  double r_right = 0.0;
  std::vector<double> t;
  std::vector<double> u;
};
ParsedProfile parse_profile_table(const std::string& text);

// Reassemble the mesh and candidate from a complete set of component
// profiles (annulus 0..n−1 of one run). Throws ArchiveError on gaps or
// mismatched junctions.
NodalCandidate candidate_from_profiles(const std::vector<ParsedProfile>& comps);

// --- standard tables -----------------------------------------------------------
// Derives every table from the staged summary.json alone (so a reloaded
// archive reproduces them without re-solving): energies.csv, junctions.csv,
// bounds.csv, blimit.csv always (header-only when their stage is absent),
// plus per-study tables when their data is present.
void export_tables(RunArchive& ar);

// --- pipelines -----------------------------------------------------------------
struct RunReport {
  RunArchive archive;        // config echo, profiles, summary.json, tables
  bool verdict_pass = true;  // false → the run completed but a verdict failed
};

RunReport run_solve(const RunConfig& cfg);
RunReport run_verify_monotonicity(const RunConfig& cfg, int k_max);
RunReport run_verify_pohozaev(const RunConfig& cfg);
RunReport run_verify_bounds(const RunConfig& cfg);
RunReport run_sweep_b(const RunConfig& cfg, const std::vector<double>& b_list);
RunReport run_sp_estimate(const RunConfig& cfg, double q);
// Reloads a solve archive, reprojects the stored components onto the
// constrained Nehari set, and (optionally) cross-checks the scaling factors
// against the dense multistart search.
RunReport run_nehari_check(const std::string& archive_dir, bool with_oracle);

}  // namespace knodal
