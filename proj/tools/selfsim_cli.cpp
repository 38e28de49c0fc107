// Command-line front end. Talks to the library through the C interface only.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selfsim/selfsim.h"

namespace {

struct Flags {
  std::string system;
  std::string config;
  std::string out;
  std::string format;
  std::optional<double> tol, grid_step, radius;
  std::vector<double> radii, centers, k;
  std::optional<long long> terms, K, max_iter, depth;
};

int exit_code(ssim_status s) {
  switch (s) {
    case SSIM_OK: return 0;
    case SSIM_ERR_NONCONVERGENCE: return 2;
    case SSIM_ERR_RESOURCE: return 3;
    default: return 1;
  }
}

int report(ssim_status s) {
  std::fprintf(stderr, "selfsim: %s: %s\n", ssim_status_name(s), ssim_last_error());
  return exit_code(s);
}

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--system", f.system, "builtin system name");
  sub->add_option("--config", f.config, "JSON config file; flags override its entries");
  sub->add_option("--out", f.out, "output directory (default out)");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--tol", f.tol, "iteration tolerance");
  sub->add_option("--grid-step", f.grid_step, "lattice step of density grids");
  auto* r = sub->add_option("--radius", f.radius, "patch radius");
  sub->add_option("--radii", f.radii, "comma separated radii")->delimiter(',')->excludes(r);
  sub->add_option("--centers", f.centers, "comma separated ball centers")->delimiter(',');
  sub->add_option("--k", f.k, "comma separated frequencies")->delimiter(',');
  sub->add_option("--terms", f.terms, "Fourier product terms");
  sub->add_option("--K", f.K, "3-adic precision");
  sub->add_option("--max-iter", f.max_iter, "iteration cap");
  sub->add_option("--depth", f.depth, "atom depth for singular measures");
}

int run(const std::string& command, const Flags& f) {
  ssim_config* cfg = nullptr;
  ssim_status s;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::fprintf(stderr, "selfsim: config error: cannot read %s\n", f.config.c_str());
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    s = ssim_config_from_json(ss.str().c_str(), &cfg);
    if (s == SSIM_OK) s = ssim_config_set_string(cfg, "command", command.c_str());
  } else {
    s = ssim_config_new(command.c_str(), &cfg);
  }
  auto set_d = [&](const char* key, const std::optional<double>& v) {
    if (s == SSIM_OK && v) s = ssim_config_set_double(cfg, key, *v);
  };
  auto set_i = [&](const char* key, const std::optional<long long>& v) {
    if (s == SSIM_OK && v) s = ssim_config_set_int(cfg, key, *v);
  };
  auto set_s = [&](const char* key, const std::string& v) {
    if (s == SSIM_OK && !v.empty()) s = ssim_config_set_string(cfg, key, v.c_str());
  };
  auto set_l = [&](const char* key, const std::vector<double>& v) {
    if (s == SSIM_OK && !v.empty()) s = ssim_config_set_doubles(cfg, key, v.data(), v.size());
  };
  set_s("system", f.system);
  set_s("out", f.out);
  set_s("format", f.format);
  set_d("tol", f.tol);
  set_d("grid_step", f.grid_step);
  if (f.radius) {
    set_l("radii", {*f.radius});
  }
  set_l("radii", f.radii);
  set_l("centers", f.centers);
  set_l("k", f.k);
  set_i("terms", f.terms);
  set_i("K", f.K);
  set_i("max_iter", f.max_iter);
  set_i("depth", f.depth);
  if (s != SSIM_OK) {
    ssim_config_free(cfg);
    return report(s);
  }
  ssim_result* res = nullptr;
  s = ssim_run(cfg, &res);
  ssim_config_free(cfg);
  if (s != SSIM_OK) return report(s);
  for (size_t i = 0; i < ssim_result_line_count(res); ++i) std::printf("%s\n", ssim_result_line(res, i));
  for (size_t i = 0; i < ssim_result_file_count(res); ++i) std::printf("wrote %s\n", ssim_result_file(res, i));
  const int pass = ssim_result_pass(res);
  ssim_result_free(res);
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attractors, self-similar measures and model sets"};
  app.set_version_flag("--version", std::string(ssim_version()));
  app.require_subcommand(1);
  Flags f;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"attractor", "iterate the union map to the attractor"},
      {"measure", "self-similar density or measure approximant"},
      {"fourier", "Fourier transform as a truncated product"},
      {"weyl", "ball averages over the model set"},
      {"padic", "3-adic system against its closed form"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), f);
  app.add_subcommand("list", "print builtin system names");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "list") {
    for (size_t i = 0; i < ssim_builtin_count(); ++i) std::printf("%s\n", ssim_builtin_name(i));
    return 0;
  }
  return run(cmd, f);
}
