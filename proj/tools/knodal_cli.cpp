// Command-line front end. Talks to the solver exclusively through the C API.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "knodal.h"

namespace {

int exit_code(int status) {
  switch (status) {
    case KNODAL_OK:
      return 0;
    case KNODAL_ERR_VERDICT:
      return 1;
    case KNODAL_ERR_SOLVER:
      return 2;
    default:
      return 3;  // config and io failures are both usage problems
  }
}

// The canonical config text carries the default output directory.
std::string config_out_dir(const knodal_config* cfg) {
  const std::string text = knodal_config_text(cfg);
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    const std::string line =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (line.rfind("directory = ", 0) == 0) return line.substr(12);
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return "out";
}

bool parse_blist(const std::string& text, std::vector<double>& out) {
  std::string item;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',' || text[i] == ' ') {
      if (!item.empty()) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size()) return false;
        out.push_back(v);
        item.clear();
      }
    } else {
      item += text[i];
    }
  }
  return !out.empty();
}

void print_field(const knodal_result* res, const char* label, const char* key) {
  char buf[4096];
  if (knodal_result_get(res, key, buf, sizeof buf) == KNODAL_OK)
    std::printf("%s: %s\n", label, buf);
}

struct Cleanup {
  knodal_config* cfg = nullptr;
  knodal_result* res = nullptr;
  ~Cleanup() {
    if (res) knodal_result_free(res);
    if (cfg) knodal_config_free(cfg);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial solutions with a prescribed number of sign changes for a "
               "Kirchhoff-type equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned long long seed = 0;
  bool force = false;
  app.add_option("--config", config_path, "configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_flag("--force", force, "replace an existing output directory");

  auto* solve = app.add_subcommand("solve", "compute the solution with k sign changes");
  int solve_k = -1;
  solve->add_option("--k", solve_k, "number of sign changes (overrides the config)");

  auto* verify = app.add_subcommand("verify", "check a proved property of the solutions");
  verify->require_subcommand(1);
  auto* mono = verify->add_subcommand(
      "monotonicity", "energy strictly increasing in k, with the (k+1)-fold bound");
  int kmax = 2;
  mono->add_option("--kmax", kmax, "largest sign-change count to include");
  auto* poho =
      verify->add_subcommand("pohozaev", "scaling identity of the positive ground state");
  auto* bounds =
      verify->add_subcommand("bounds", "a-priori component-norm and energy lower bounds");

  auto* sweep = app.add_subcommand(
      "sweep-b", "re-solve at fixed radii for each coupling value, against the b = 0 limit");
  int sweep_k = -1;
  std::string blist_text;
  sweep->add_option("--k", sweep_k, "number of sign changes (overrides the config)");
  sweep->add_option("--blist", blist_text, "comma-separated coupling values")->required();

  auto* sp = app.add_subcommand("sp-estimate", "embedding constant of the radial space");
  double q = 0.0;
  sp->add_option("--q", q, "exponent (defaults to the problem's p)");

  auto* check = app.add_subcommand(
      "nehari-check", "reproject an archived candidate and cross-check the scaling factors");
  std::string archive_dir;
  bool no_oracle = false;
  check->add_option("archive", archive_dir, "solve archive to reload")->required();
  check->add_flag("--no-oracle", no_oracle, "skip the dense multistart cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  char err[4096] = {0};
  Cleanup owned;
  int st = KNODAL_OK;

  if (!check->parsed() || !config_path.empty()) {
    st = config_path.empty()
             ? knodal_config_default(&owned.cfg, err, sizeof err)
             : knodal_config_from_file(config_path.c_str(), &owned.cfg, err, sizeof err);
    if (st != KNODAL_OK) {
      std::fprintf(stderr, "error: %s\n", err);
      return exit_code(st);
    }
    if (seed_opt->count() > 0) {
      st = knodal_config_override(owned.cfg, "solver.seed", std::to_string(seed).c_str(),
                                  err, sizeof err);
      if (st != KNODAL_OK) {
        std::fprintf(stderr, "error: %s\n", err);
        return exit_code(st);
      }
    }
  }

  auto override_k = [&](int k) -> int {
    if (k < 0) return KNODAL_OK;
    return knodal_config_override(owned.cfg, "problem.k", std::to_string(k).c_str(), err,
                                  sizeof err);
  };

  std::string dest;
  if (out_opt->count() > 0)
    dest = out_dir;
  else if (owned.cfg && !check->parsed())
    dest = config_out_dir(owned.cfg);
  const char* dest_cstr = dest.empty() ? nullptr : dest.c_str();

  if (solve->parsed()) {
    st = override_k(solve_k);
    if (st == KNODAL_OK)
      st = knodal_solve(owned.cfg, dest_cstr, force ? 1 : 0, &owned.res, err, sizeof err);
  } else if (mono->parsed()) {
    st = knodal_verify_monotonicity(owned.cfg, kmax, dest_cstr, force ? 1 : 0, &owned.res,
                                    err, sizeof err);
  } else if (poho->parsed()) {
    st = knodal_verify_pohozaev(owned.cfg, dest_cstr, force ? 1 : 0, &owned.res, err,
                                sizeof err);
  } else if (bounds->parsed()) {
    st = knodal_verify_bounds(owned.cfg, dest_cstr, force ? 1 : 0, &owned.res, err,
                              sizeof err);
  } else if (sweep->parsed()) {
    std::vector<double> bs;
    if (!parse_blist(blist_text, bs)) {
      std::fprintf(stderr, "error: --blist must be a comma-separated list of numbers\n");
      return 3;
    }
    st = override_k(sweep_k);
    if (st == KNODAL_OK)
      st = knodal_sweep_b(owned.cfg, bs.data(), bs.size(), dest_cstr, force ? 1 : 0,
                          &owned.res, err, sizeof err);
  } else if (sp->parsed()) {
    st = knodal_sp_estimate(owned.cfg, q, dest_cstr, force ? 1 : 0, &owned.res, err,
                            sizeof err);
  } else if (check->parsed()) {
    st = knodal_nehari_check(archive_dir.c_str(), no_oracle ? 0 : 1, dest_cstr,
                             force ? 1 : 0, &owned.res, err, sizeof err);
  }

  if (!owned.res) {
    std::fprintf(stderr, "error: %s\n", err[0] ? err : knodal_status_name(st));
    return exit_code(st);
  }

  if (solve->parsed()) {
    print_field(owned.res, "k", "problem.k");
    print_field(owned.res, "energy", "solve.energy");
    print_field(owned.res, "sign changes", "solve.sign_changes");
    print_field(owned.res, "radii", "solve.radii");
    print_field(owned.res, "residual", "solve.residual");
    print_field(owned.res, "max relative jump", "solve.max_relative_jump");
  } else if (mono->parsed()) {
    print_field(owned.res, "energies", "energies");
    print_field(owned.res, "margin floor", "monotonicity.margin_floor");
  } else if (poho->parsed()) {
    print_field(owned.res, "relative residual", "pohozaev.relative_final");
    print_field(owned.res, "shrinks under refinement", "pohozaev.shrinking");
  } else if (bounds->parsed()) {
    print_field(owned.res, "embedding constant", "bounds.S_p");
    print_field(owned.res, "constrained minimum", "bounds.alpha_k");
    print_field(owned.res, "energy floor", "bounds.alpha_floor");
  } else if (sweep->parsed()) {
    print_field(owned.res, "limit energy", "sweep.energy_limit");
    print_field(owned.res, "distances decreasing", "sweep.distances_decreasing");
    print_field(owned.res, "energies decreasing", "sweep.energies_decreasing");
  } else if (sp->parsed()) {
    print_field(owned.res, "q", "sobolev.q");
    print_field(owned.res, "value", "sobolev.value");
    print_field(owned.res, "restart spread", "sobolev.restarts_agreement");
  } else if (check->parsed()) {
    print_field(owned.res, "max unit deviation", "nehari_check.max_unit_deviation");
    print_field(owned.res, "oracle agreement", "nehari_check.oracle_agreement");
  }
  std::printf("verdict: %s\n", knodal_result_verdict(owned.res) ? "pass" : "FAIL");
  if (dest_cstr) std::printf("archive: %s\n", dest.c_str());
  return exit_code(st);
}
