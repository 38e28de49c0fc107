#include "selfsim/selfsim.h"

#include <new>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/experiments.hpp"

struct ssim_config {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  std::string text;
};

struct ssim_result {
  selfsim::RunReport report;
};

namespace {

thread_local std::string g_error;

const std::set<std::string> kKeys = {"command", "system",   "tol",   "grid_step", "radius", "radii", "centers",
                                     "k",       "terms",    "K",     "max_iter",  "depth",  "out",   "format"};

ssim_status fail(ssim_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

ssim_status ok() {
  g_error.clear();
  return SSIM_OK;
}

// Runs f, mapping library exceptions onto status codes.
template <class F>
ssim_status guarded(F&& f) {
  try {
    return f();
  } catch (const selfsim::ConfigError& e) {
    return fail(SSIM_ERR_CONFIG, e.what());
  } catch (const selfsim::NonConvergenceError& e) {
    return fail(SSIM_ERR_NONCONVERGENCE, e.what());
  } catch (const selfsim::ResourceError& e) {
    return fail(SSIM_ERR_RESOURCE, e.what());
  } catch (const selfsim::CompatibilityError& e) {
    return fail(SSIM_ERR_COMPATIBILITY, e.what());
  } catch (const selfsim::ArgumentError& e) {
    return fail(SSIM_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SSIM_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(SSIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SSIM_ERR_INTERNAL, "unknown error");
  }
}

ssim_status check_key(const ssim_config* cfg, const char* key) {
  if (!cfg) return fail(SSIM_ERR_ARGUMENT, "null config");
  if (!key) return fail(SSIM_ERR_ARGUMENT, "null key");
  if (!kKeys.count(key)) return fail(SSIM_ERR_CONFIG, std::string("unknown config key '") + key + "'");
  return SSIM_OK;
}

}  // namespace

extern "C" {

const char* ssim_version(void) { return "0.1.0"; }

const char* ssim_last_error(void) { return g_error.c_str(); }

const char* ssim_status_name(ssim_status s) {
  switch (s) {
    case SSIM_OK: return "ok";
    case SSIM_ERR_CONFIG: return "config error";
    case SSIM_ERR_NONCONVERGENCE: return "non-convergence";
    case SSIM_ERR_RESOURCE: return "resource cap";
    case SSIM_ERR_ARGUMENT: return "argument error";
    case SSIM_ERR_COMPATIBILITY: return "compatibility error";
    case SSIM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t ssim_builtin_count(void) { return selfsim::builtin_names().size(); }

const char* ssim_builtin_name(size_t i) {
  static const std::vector<std::string> names = selfsim::builtin_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

ssim_status ssim_config_new(const char* command, ssim_config** out) {
  if (!out) return fail(SSIM_ERR_ARGUMENT, "null output pointer");
  *out = nullptr;
  if (!command) return fail(SSIM_ERR_ARGUMENT, "null command");
  return guarded([&] {
    auto* c = new ssim_config;
    c->doc["command"] = command;
    *out = c;
    return ok();
  });
}

ssim_status ssim_config_from_json(const char* json, ssim_config** out) {
  if (!out) return fail(SSIM_ERR_ARGUMENT, "null output pointer");
  *out = nullptr;
  if (!json) return fail(SSIM_ERR_ARGUMENT, "null json");
  return guarded([&] {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      return fail(SSIM_ERR_CONFIG, std::string("malformed config JSON: ") + e.what());
    }
    if (!j.is_object()) return fail(SSIM_ERR_CONFIG, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!kKeys.count(it.key())) return fail(SSIM_ERR_CONFIG, "unknown config key '" + it.key() + "'");
    auto* c = new ssim_config;
    c->doc = std::move(j);
    *out = c;
    return ok();
  });
}

void ssim_config_free(ssim_config* cfg) { delete cfg; }

ssim_status ssim_config_set_string(ssim_config* cfg, const char* key, const char* value) {
  if (auto s = check_key(cfg, key)) return s;
  if (!value) return fail(SSIM_ERR_ARGUMENT, "null value");
  return guarded([&] {
    cfg->doc[key] = value;
    return ok();
  });
}

ssim_status ssim_config_set_double(ssim_config* cfg, const char* key, double value) {
  if (auto s = check_key(cfg, key)) return s;
  return guarded([&] {
    cfg->doc[key] = value;
    return ok();
  });
}

ssim_status ssim_config_set_int(ssim_config* cfg, const char* key, long long value) {
  if (auto s = check_key(cfg, key)) return s;
  return guarded([&] {
    cfg->doc[key] = value;
    return ok();
  });
}

ssim_status ssim_config_set_doubles(ssim_config* cfg, const char* key, const double* values, size_t n) {
  if (auto s = check_key(cfg, key)) return s;
  if (!values && n > 0) return fail(SSIM_ERR_ARGUMENT, "null values");
  return guarded([&] {
    cfg->doc[key] = std::vector<double>(values, values + n);
    if (std::string(key) == "radii") cfg->doc.erase("radius");
    if (std::string(key) == "radius") cfg->doc.erase("radii");
    return ok();
  });
}

ssim_status ssim_config_set_json(ssim_config* cfg, const char* key, const char* json) {
  if (auto s = check_key(cfg, key)) return s;
  if (!json) return fail(SSIM_ERR_ARGUMENT, "null json");
  return guarded([&] {
    try {
      cfg->doc[key] = nlohmann::ordered_json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      return fail(SSIM_ERR_CONFIG, std::string("malformed JSON for ") + key + ": " + e.what());
    }
    return ok();
  });
}

const char* ssim_config_json(ssim_config* cfg) {
  if (!cfg) return nullptr;
  cfg->text = cfg->doc.dump();
  return cfg->text.c_str();
}

ssim_status ssim_config_validate(const ssim_config* cfg) {
  if (!cfg) return fail(SSIM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    selfsim::parse_config(cfg->doc.dump());
    return ok();
  });
}

ssim_status ssim_run(const ssim_config* cfg, ssim_result** out) {
  if (!out) return fail(SSIM_ERR_ARGUMENT, "null output pointer");
  *out = nullptr;
  if (!cfg) return fail(SSIM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const auto c = selfsim::parse_config(cfg->doc.dump());
    auto* r = new ssim_result{selfsim::run_experiment(c)};
    *out = r;
    return ok();
  });
}

void ssim_result_free(ssim_result* res) { delete res; }

int ssim_result_pass(const ssim_result* res) { return res && res->report.pass ? 1 : 0; }

size_t ssim_result_file_count(const ssim_result* res) { return res ? res->report.files.size() : 0; }

const char* ssim_result_file(const ssim_result* res, size_t i) {
  if (!res || i >= res->report.files.size()) return nullptr;
  return res->report.files[i].c_str();
}

size_t ssim_result_line_count(const ssim_result* res) { return res ? res->report.lines.size() : 0; }

const char* ssim_result_line(const ssim_result* res, size_t i) {
  if (!res || i >= res->report.lines.size()) return nullptr;
  return res->report.lines[i].c_str();
}

ssim_status ssim_result_value(const ssim_result* res, const char* key, double* out) {
  if (!res || !key || !out) return fail(SSIM_ERR_ARGUMENT, "null argument");
  auto it = res->report.values.find(key);
  if (it == res->report.values.end()) return fail(SSIM_ERR_ARGUMENT, std::string("no value named '") + key + "'");
  *out = it->second;
  return ok();
}

}  // extern "C"
