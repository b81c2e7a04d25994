#include "knodal.h"

#include <cctype>
#include <cstring>
#include <string>
#include <vector>

#include "archive.hpp"
#include "json.hpp"

struct knodal_config {
  std::string text;      // canonical serialized form
  std::string base_dir;  // anchor for relative table-potential paths
  knodal::RunConfig cfg;
};

struct knodal_result {
  knodal::RunReport rep;
  std::string summary;
  nlohmann::json parsed;
};

namespace {

void set_err(char* errbuf, size_t errcap, const std::string& msg) {
  if (!errbuf || errcap == 0) return;
  const size_t n = std::min(msg.size(), errcap - 1);
  std::memcpy(errbuf, msg.data(), n);
  errbuf[n] = '\0';
}

int fail(int status, char* errbuf, size_t errcap, const std::string& msg) {
  set_err(errbuf, errcap, msg);
  return status;
}

template <typename Fn>
int run_pipeline(Fn&& fn, const char* out_dir, int force, knodal_result** result,
                 char* errbuf, size_t errcap) {
  if (!result)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null result pointer");
  try {
    knodal::RunReport rep = fn();
    if (out_dir && *out_dir) rep.archive.commit(out_dir, force != 0);
    auto* res = new knodal_result;
    res->rep = std::move(rep);
    res->summary = res->rep.archive.get("summary.json");
    res->parsed = nlohmann::json::parse(res->summary);
    *result = res;
    return res->rep.verdict_pass ? KNODAL_OK : KNODAL_ERR_VERDICT;
  } catch (const knodal::ConfigError& e) {
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, e.what());
  } catch (const knodal::ArchiveError& e) {
    return fail(KNODAL_ERR_IO, errbuf, errcap, e.what());
  } catch (const std::exception& e) {
    return fail(KNODAL_ERR_SOLVER, errbuf, errcap, e.what());
  }
}

int make_config(const std::string& text, const std::string& base_dir, knodal_config** out,
                char* errbuf, size_t errcap) {
  try {
    knodal::RunConfig cfg = knodal::parse_config_text(text, base_dir);
    auto* handle = new knodal_config;
    handle->cfg = std::move(cfg);
    handle->base_dir = base_dir;
    handle->text = knodal::serialize_config(handle->cfg);
    *out = handle;
    return KNODAL_OK;
  } catch (const knodal::ConfigError& e) {
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, e.what());
  } catch (const std::exception& e) {
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, e.what());
  }
}

}  // namespace

extern "C" {

const char* knodal_version(void) { return knodal::kToolVersion; }

const char* knodal_status_name(int status) {
  switch (status) {
    case KNODAL_OK:
      return "ok";
    case KNODAL_ERR_VERDICT:
      return "verdict-failure";
    case KNODAL_ERR_SOLVER:
      return "solver-failure";
    case KNODAL_ERR_CONFIG:
      return "config-error";
    case KNODAL_ERR_IO:
      return "io-error";
    default:
      return "unknown-status";
  }
}

int knodal_config_from_file(const char* path, knodal_config** out, char* errbuf,
                            size_t errcap) {
  if (!path || !out)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null argument");
  try {
    knodal::RunConfig cfg = knodal::parse_config_file(path);
    auto* handle = new knodal_config;
    handle->cfg = std::move(cfg);
    const std::string p(path);
    const size_t slash = p.find_last_of('/');
    handle->base_dir = slash == std::string::npos ? "." : p.substr(0, slash);
    handle->text = knodal::serialize_config(handle->cfg);
    *out = handle;
    return KNODAL_OK;
  } catch (const std::exception& e) {
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, e.what());
  }
}

int knodal_config_from_string(const char* text, const char* base_dir, knodal_config** out,
                              char* errbuf, size_t errcap) {
  if (!text || !out)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null argument");
  return make_config(text, base_dir && *base_dir ? base_dir : ".", out, errbuf, errcap);
}

int knodal_config_default(knodal_config** out, char* errbuf, size_t errcap) {
  if (!out) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null argument");
  auto* handle = new knodal_config;
  handle->base_dir = ".";
  handle->text = knodal::serialize_config(handle->cfg);
  *out = handle;
  return KNODAL_OK;
}

int knodal_config_override(knodal_config* cfg, const char* dotted_key, const char* value,
                           char* errbuf, size_t errcap) {
  if (!cfg || !dotted_key || !value)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null argument");
  const std::string dotted(dotted_key);
  const size_t dot = dotted.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size())
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap,
                "override key must be section.key, got " + dotted);
  const std::string section = dotted.substr(0, dot);
  const std::string key = dotted.substr(dot + 1);

  // The canonical text lists every key once; rewrite its line in place.
  std::string patched;
  bool in_section = false, replaced = false;
  size_t pos = 0;
  while (pos <= cfg->text.size()) {
    const size_t nl = cfg->text.find('\n', pos);
    const std::string line =
        cfg->text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (!line.empty() && line.front() == '[')
      in_section = line == "[" + section + "]";
    else if (in_section && line.rfind(key + " = ", 0) == 0 && !replaced) {
      patched += key + " = " + value + "\n";
      replaced = true;
      if (nl == std::string::npos) break;
      pos = nl + 1;
      continue;
    }
    patched += line;
    if (nl == std::string::npos) break;
    patched += "\n";
    pos = nl + 1;
  }
  if (!replaced)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap,
                dotted + ": no such configuration key");
  try {
    knodal::RunConfig parsed = knodal::parse_config_text(patched, cfg->base_dir);
    cfg->cfg = std::move(parsed);
    cfg->text = knodal::serialize_config(cfg->cfg);
    return KNODAL_OK;
  } catch (const std::exception& e) {
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, e.what());
  }
}

const char* knodal_config_text(const knodal_config* cfg) {
  return cfg ? cfg->text.c_str() : "";
}

void knodal_config_free(knodal_config* cfg) { delete cfg; }

int knodal_solve(const knodal_config* cfg, const char* out_dir, int force,
                 knodal_result** result, char* errbuf, size_t errcap) {
  if (!cfg) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null config");
  return run_pipeline([&] { return knodal::run_solve(cfg->cfg); }, out_dir, force, result,
                      errbuf, errcap);
}

int knodal_verify_monotonicity(const knodal_config* cfg, int k_max, const char* out_dir,
                               int force, knodal_result** result, char* errbuf,
                               size_t errcap) {
  if (!cfg) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null config");
  return run_pipeline([&] { return knodal::run_verify_monotonicity(cfg->cfg, k_max); },
                      out_dir, force, result, errbuf, errcap);
}

int knodal_verify_pohozaev(const knodal_config* cfg, const char* out_dir, int force,
                           knodal_result** result, char* errbuf, size_t errcap) {
  if (!cfg) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null config");
  return run_pipeline([&] { return knodal::run_verify_pohozaev(cfg->cfg); }, out_dir, force,
                      result, errbuf, errcap);
}

int knodal_verify_bounds(const knodal_config* cfg, const char* out_dir, int force,
                         knodal_result** result, char* errbuf, size_t errcap) {
  if (!cfg) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null config");
  return run_pipeline([&] { return knodal::run_verify_bounds(cfg->cfg); }, out_dir, force,
                      result, errbuf, errcap);
}

int knodal_sweep_b(const knodal_config* cfg, const double* b_list, size_t count,
                   const char* out_dir, int force, knodal_result** result, char* errbuf,
                   size_t errcap) {
  if (!cfg || (!b_list && count > 0))
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null argument");
  const std::vector<double> bs(b_list, b_list + count);
  return run_pipeline([&] { return knodal::run_sweep_b(cfg->cfg, bs); }, out_dir, force,
                      result, errbuf, errcap);
}

int knodal_sp_estimate(const knodal_config* cfg, double q, const char* out_dir, int force,
                       knodal_result** result, char* errbuf, size_t errcap) {
  if (!cfg) return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null config");
  const double qq = q > 0.0 ? q : cfg->cfg.problem.p;
  return run_pipeline([&] { return knodal::run_sp_estimate(cfg->cfg, qq); }, out_dir, force,
                      result, errbuf, errcap);
}

int knodal_nehari_check(const char* archive_dir, int with_oracle, const char* out_dir,
                        int force, knodal_result** result, char* errbuf, size_t errcap) {
  if (!archive_dir)
    return fail(KNODAL_ERR_CONFIG, errbuf, errcap, "null archive directory");
  return run_pipeline([&] { return knodal::run_nehari_check(archive_dir, with_oracle != 0); },
                      out_dir, force, result, errbuf, errcap);
}

int knodal_result_verdict(const knodal_result* result) {
  return result && result->rep.verdict_pass ? 1 : 0;
}

const char* knodal_result_summary_json(const knodal_result* result) {
  return result ? result->summary.c_str() : "";
}

int knodal_result_get(const knodal_result* result, const char* dotted_key, char* buf,
                      size_t cap) {
  if (!result || !dotted_key || !buf || cap == 0) return KNODAL_ERR_IO;
  const nlohmann::json* cur = &result->parsed;
  std::string key(dotted_key);
  size_t pos = 0;
  while (pos <= key.size()) {
    const size_t dot = key.find('.', pos);
    const std::string seg =
        key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (seg.empty()) return KNODAL_ERR_IO;
    if (cur->is_array()) {
      bool digits = true;
      for (char c : seg)
        if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
      if (!digits) return KNODAL_ERR_IO;
      const size_t idx = std::stoul(seg);
      if (idx >= cur->size()) return KNODAL_ERR_IO;
      cur = &(*cur)[idx];
    } else if (cur->is_object() && cur->contains(seg)) {
      cur = &(*cur)[seg];
    } else {
      return KNODAL_ERR_IO;
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  const std::string out = cur->is_string() ? cur->get<std::string>() : cur->dump();
  if (out.size() + 1 > cap) return KNODAL_ERR_IO;
  std::memcpy(buf, out.data(), out.size());
  buf[out.size()] = '\0';
  return KNODAL_OK;
}

void knodal_result_free(knodal_result* result) { delete result; }

}  // extern "C"
