#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace knodal {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// shortest decimal that round-trips to the same double
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

bool parse_int(const std::string& text, long long& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

struct Violations {
  std::vector<std::string> list;

  void add(const std::string& key, const std::string& value, const std::string& constraint) {
    list.push_back(key + " = " + value + ": " + constraint);
  }
  void raw(std::string msg) { list.push_back(std::move(msg)); }
};

bool is_relative(const std::string& path) { return path.empty() || path.front() != '/'; }

}  // namespace

Potential parse_potential(const std::string& source, const std::string& base_dir,
                          std::vector<std::string>& errors, std::string* table_text) {
  const std::string src = trim(source);
  if (src.rfind("constant:", 0) == 0) {
    double v = 0.0;
    if (!parse_double(src.substr(9), v)) {
      errors.push_back("potential = " + src + ": constant level must be a number");
    } else if (!(v > 0.0)) {
      errors.push_back("potential = " + src + ": constant level must be positive");
    } else {
      return Potential::constant(v);
    }
    return Potential::constant(1.0);
  }
  if (src.rfind("table:", 0) == 0) {
    std::string path = trim(src.substr(6));
    if (path.empty()) {
      errors.push_back("potential = " + src + ": table form needs a file path");
      return Potential::constant(1.0);
    }
    if (is_relative(path)) path = base_dir + "/" + path;
    std::ifstream in(path);
    if (!in) {
      errors.push_back("potential = " + src + ": cannot open table file " + path);
      return Potential::constant(1.0);
    }
    std::ostringstream whole;
    whole << in.rdbuf();
    const std::string raw = whole.str();
    if (table_text) *table_text = raw;
    std::vector<double> ts, vs;
    std::string line;
    std::size_t lineno = 0;
    bool ok = true;
    std::istringstream rows_in(raw);
    while (std::getline(rows_in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string t = trim(line);
      if (t.empty()) continue;
      std::replace(t.begin(), t.end(), ',', ' ');
      std::istringstream row(t);
      double tv = 0.0, vv = 0.0;
      if (!(row >> tv >> vv)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, ": table row %zu is not `t,v`", lineno);
        errors.push_back("potential = " + src + buf);
        ok = false;
        break;
      }
      ts.push_back(tv);
      vs.push_back(vv);
    }
    if (ok) {
      try {
        return Potential::table(std::move(ts), std::move(vs));
      } catch (const std::exception& e) {
        errors.push_back("potential = " + src + ": " + e.what());
      }
    }
    return Potential::constant(1.0);
  }
  errors.push_back("potential = " + src + ": must be constant:<v> or table:<file>");
  return Potential::constant(1.0);
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  Violations bad;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::string potential_text;

  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        char buf[96];
        std::snprintf(buf, sizeof buf, "line %zu: unterminated section header", lineno);
        bad.raw(buf);
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section != "problem" && section != "mesh" && section != "solver" &&
          section != "output")
        bad.raw("section [" + section + "]: unknown (expected problem, mesh, solver, output)");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "line %zu: expected `key = value`", lineno);
      bad.raw(buf);
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) {
      bad.raw("key " + key + " appears before any [section] header");
      continue;
    }

    auto want_double = [&](double& slot, const char* constraint, auto pred) {
      double v = 0.0;
      if (!parse_double(value, v))
        bad.add(key, value, "must be a number");
      else if (!pred(v))
        bad.add(key, value, constraint);
      else
        slot = v;
    };
    auto want_int = [&](int& slot, const char* constraint, auto pred) {
      long long v = 0;
      if (!parse_int(value, v))
        bad.add(key, value, "must be an integer");
      else if (!pred(v))
        bad.add(key, value, constraint);
      else
        slot = static_cast<int>(v);
    };

    if (section == "problem") {
      if (key == "b") {
        want_double(cfg.problem.b, "must be >= 0", [](double v) { return v >= 0.0; });
      } else if (key == "p") {
        double v = 0.0;
        if (!parse_double(value, v))
          bad.add(key, value, "must be a number");
        else
          cfg.problem.p = v;  // range checked by the problem validator below
      } else if (key == "potential") {
        potential_text = value;
      } else if (key == "R") {
        want_double(cfg.problem.R, "must be positive", [](double v) { return v > 0.0; });
      } else if (key == "mode") {
        if (value == "ball")
          cfg.problem.mode = DomainMode::Ball;
        else if (value == "r3-emulation")
          cfg.problem.mode = DomainMode::R3Emulation;
        else
          bad.add(key, value, "must be ball or r3-emulation");
      } else if (key == "k") {
        want_int(cfg.problem.k, "must be >= 0", [](long long v) { return v >= 0; });
      } else {
        bad.add(key, value, "unknown key in [problem]");
      }
    } else if (section == "mesh") {
      if (key == "cells_per_annulus") {
        want_int(cfg.mesh.spec.cells_per_annulus, "must be >= 4 for runs",
                 [](long long v) { return v >= 4; });
      } else if (key == "grading") {
        try {
          cfg.mesh.spec.grading = GradingSpec::parse(value);
        } catch (const std::exception& e) {
          bad.add(key, value, e.what());
        }
      } else if (key == "refinement_levels") {
        want_int(cfg.mesh.refinement_levels, "must be in [1, 6]",
                 [](long long v) { return v >= 1 && v <= 6; });
      } else {
        bad.add(key, value, "unknown key in [mesh]");
      }
    } else if (section == "solver") {
      auto positive = [](double v) { return v > 0.0; };
      if (key == "newton_tol") {
        want_double(cfg.solver.newton_tol, "must be positive", positive);
      } else if (key == "inner_tol") {
        want_double(cfg.solver.inner_tol, "must be positive", positive);
      } else if (key == "outer_tol") {
        want_double(cfg.solver.outer_tol, "must be positive", positive);
      } else if (key == "polish_tol") {
        want_double(cfg.solver.polish_tol, "must be positive", positive);
      } else if (key == "max_inner_iters") {
        want_int(cfg.solver.max_inner_iters, "must be >= 1",
                 [](long long v) { return v >= 1; });
      } else if (key == "max_outer_evals") {
        want_int(cfg.solver.max_outer_evals, "must be >= 1",
                 [](long long v) { return v >= 1; });
      } else if (key == "restarts") {
        want_int(cfg.solver.restarts, "must be >= 1", [](long long v) { return v >= 1; });
      } else if (key == "seed") {
        std::uint64_t v = 0;
        if (!parse_u64(value, v))
          bad.add(key, value, "must be a non-negative integer");
        else
          cfg.solver.seed = v;
      } else {
        bad.add(key, value, "unknown key in [solver]");
      }
    } else if (section == "output") {
      if (key == "directory") {
        if (value.empty())
          bad.add(key, value, "must not be empty");
        else
          cfg.output.directory = value;
      } else if (key == "formats") {
        std::vector<std::string> formats;
        std::string item;
        std::istringstream items(value);
        bool ok = true;
        while (std::getline(items, item, ',')) {
          item = trim(item);
          if (item != "csv" && item != "json") {
            bad.add(key, value, "formats are csv and json");
            ok = false;
            break;
          }
          if (std::find(formats.begin(), formats.end(), item) == formats.end())
            formats.push_back(item);
        }
        if (ok && formats.empty()) {
          bad.add(key, value, "needs at least one format");
          ok = false;
        }
        if (ok) cfg.output.formats = std::move(formats);
      } else {
        bad.add(key, value, "unknown key in [output]");
      }
    }
  }

  if (!potential_text.empty()) {
    cfg.potential_source = potential_text;
    cfg.problem.potential =
        parse_potential(potential_text, base_dir, bad.list, &cfg.potential_table_text);
  }
  for (const std::string& msg : cfg.problem.validate()) bad.raw(msg);

  if (!bad.list.empty()) {
    std::string all = "configuration invalid:";
    for (const std::string& msg : bad.list) {
      all += "\n  - ";
      all += msg;
    }
    throw ConfigError(all);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string dir = ".";
  const std::size_t slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return parse_config_text(buf.str(), dir);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "b = " << fmt_double(cfg.problem.b) << "\n";
  out << "p = " << fmt_double(cfg.problem.p) << "\n";
  out << "potential = " << cfg.potential_source << "\n";
  out << "R = " << fmt_double(cfg.problem.R) << "\n";
  out << "mode = " << mode_name(cfg.problem.mode) << "\n";
  out << "k = " << cfg.problem.k << "\n";
  out << "\n[mesh]\n";
  out << "cells_per_annulus = " << cfg.mesh.spec.cells_per_annulus << "\n";
  out << "grading = " << cfg.mesh.spec.grading.describe() << "\n";
  out << "refinement_levels = " << cfg.mesh.refinement_levels << "\n";
  out << "\n[solver]\n";
  out << "newton_tol = " << fmt_double(cfg.solver.newton_tol) << "\n";
  out << "inner_tol = " << fmt_double(cfg.solver.inner_tol) << "\n";
  out << "outer_tol = " << fmt_double(cfg.solver.outer_tol) << "\n";
  out << "polish_tol = " << fmt_double(cfg.solver.polish_tol) << "\n";
  out << "max_inner_iters = " << cfg.solver.max_inner_iters << "\n";
  out << "max_outer_evals = " << cfg.solver.max_outer_evals << "\n";
  out << "restarts = " << cfg.solver.restarts << "\n";
  out << "seed = " << cfg.solver.seed << "\n";
  out << "\n[output]\n";
  out << "directory = " << cfg.output.directory << "\n";
  out << "formats = ";
  for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
    if (i > 0) out << ",";
    out << cfg.output.formats[i];
  }
  out << "\n";
  return out.str();
}

OuterSolveOpts outer_opts_from(const RunConfig& cfg) {
  OuterSolveOpts opts;
  opts.restarts = cfg.solver.restarts;
  opts.max_evals = cfg.solver.max_outer_evals;
  opts.simplex_tol_rel = cfg.solver.outer_tol;
  opts.seed = cfg.solver.seed;
  opts.inner.residual_tol = cfg.solver.inner_tol;
  opts.inner.projection_tol = cfg.solver.newton_tol;
  opts.inner.max_iters = cfg.solver.max_inner_iters;
  opts.mesh = cfg.mesh.spec;
  return opts;
}

}  // namespace knodal
