#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "selfsim/selfsim.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("selfsim_capi_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Owns a config and a result for one run.
struct Run {
  ssim_config* cfg = nullptr;
  ssim_result* res = nullptr;
  ~Run() {
    ssim_result_free(res);
    ssim_config_free(cfg);
  }
};

double value(const ssim_result* r, const char* key) {
  double v = NAN;
  REQUIRE(ssim_result_value(r, key, &v) == SSIM_OK);
  return v;
}

}  // namespace

TEST_CASE("version and builtins") {
  CHECK(std::strlen(ssim_version()) > 0);
  REQUIRE(ssim_builtin_count() == 6);
  CHECK(std::string(ssim_builtin_name(0)) == "silver-min");
  CHECK(std::string(ssim_builtin_name(5)) == "ternary-padic");
  CHECK(ssim_builtin_name(6) == nullptr);
  CHECK(std::string(ssim_status_name(SSIM_ERR_RESOURCE)) == "resource cap");
}

TEST_CASE("handle and argument errors") {
  ssim_config* c = nullptr;
  CHECK(ssim_config_new(nullptr, &c) == SSIM_ERR_ARGUMENT);
  CHECK(c == nullptr);
  CHECK(std::strlen(ssim_last_error()) > 0);
  CHECK(ssim_config_new("measure", nullptr) == SSIM_ERR_ARGUMENT);
  CHECK(ssim_config_validate(nullptr) == SSIM_ERR_ARGUMENT);
  ssim_result* r = nullptr;
  CHECK(ssim_run(nullptr, &r) == SSIM_ERR_ARGUMENT);
  CHECK(ssim_result_file_count(nullptr) == 0);
  CHECK(ssim_result_file(nullptr, 0) == nullptr);
  ssim_config_free(nullptr);
  ssim_result_free(nullptr);

  REQUIRE(ssim_config_new("measure", &c) == SSIM_OK);
  CHECK(std::string(ssim_last_error()).empty());
  CHECK(ssim_config_set_double(c, "no_such_key", 1) == SSIM_ERR_CONFIG);
  CHECK(ssim_config_set_json(c, "system", "{not json") == SSIM_ERR_CONFIG);
  CHECK(ssim_config_set_string(c, "system", nullptr) == SSIM_ERR_ARGUMENT);
  ssim_config_free(c);

  CHECK(ssim_config_from_json("[1,2]", &c) == SSIM_ERR_CONFIG);
  CHECK(ssim_config_from_json("{\"command\":\"measure\",\"extra\":1}", &c) == SSIM_ERR_CONFIG);
  CHECK(c == nullptr);
}

TEST_CASE("validation happens before computation") {
  const fs::path out = scratch("validate");
  auto check = [&](const std::string& json, ssim_status want) {
    Run run;
    REQUIRE(ssim_config_from_json(json.c_str(), &run.cfg) == SSIM_OK);
    REQUIRE(ssim_config_set_string(run.cfg, "out", out.c_str()) == SSIM_OK);
    CHECK(ssim_config_validate(run.cfg) == want);
    CHECK(ssim_run(run.cfg, &run.res) == want);
    CHECK(run.res == nullptr);
  };
  check(R"({"command":"measure","system":"nope"})", SSIM_ERR_CONFIG);
  check(R"({"command":"frobnicate","system":"silver"})", SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":"silver-max","tol":0})", SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":"silver-max","grid_step":-1})", SSIM_ERR_CONFIG);
  check(R"({"command":"weyl","system":"silver","radii":[100,-5]})", SSIM_ERR_CONFIG);
  check(R"({"command":"weyl","system":"silver","radius":5,"radii":[1]})", SSIM_ERR_CONFIG);
  check(R"({"command":"padic","system":"silver"})", SSIM_ERR_CONFIG);
  check(R"({"command":"fourier","system":"ammann-beenker"})", SSIM_ERR_CONFIG);
  check(R"({"command":"weyl","system":"point"})", SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":"silver","format":"xml"})", SSIM_ERR_CONFIG);
  check(R"({"command":"padic","K":2})", SSIM_ERR_CONFIG);
  // inline systems: incompatible m, bad contraction, mismatched s
  // s = [[1/2, 1/2], [1/2, 1/2]] fixes only multiples of (1, 1)
  check(R"({"command":"measure","system":{"a":-0.5,"sigma":[[{"uniform":[-1,1],"mass":0.5},{"uniform":[-1,1],"mass":0.5}],)"
        R"([{"uniform":[-1,1],"mass":0.5},{"uniform":[-1,1],"mass":0.5}]],"m":[1,2]}})",
        SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":{"a":1.5,"sigma":[[{"uniform":[-1,1]}]]}})", SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":{"a":-0.5,"sigma":[[{"uniform":[-1,1]}]],"s":[[0.5]]}})", SSIM_ERR_CONFIG);
  check(R"({"command":"measure","system":{"a":-0.5,"sigma":[[{"uniform":[-1,1],"point":0}]]}})", SSIM_ERR_CONFIG);
  // nothing was computed, so nothing was written
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("runs report values and files") {
  const fs::path out = scratch("run");
  Run run;
  REQUIRE(ssim_config_new("padic", &run.cfg) == SSIM_OK);
  REQUIRE(ssim_config_set_int(run.cfg, "K", 5) == SSIM_OK);
  REQUIRE(ssim_config_set_string(run.cfg, "out", out.c_str()) == SSIM_OK);
  REQUIRE(ssim_run(run.cfg, &run.res) == SSIM_OK);
  CHECK(ssim_result_pass(run.res) == 1);
  CHECK(value(run.res, "closed_form") == 1);
  CHECK(value(run.res, "K") == 5);
  double v;
  CHECK(ssim_result_value(run.res, "missing", &v) == SSIM_ERR_ARGUMENT);
  REQUIRE(ssim_result_file_count(run.res) == 4);
  CHECK(fs::path(ssim_result_file(run.res, 0)).filename() == "ternary-padic_omega_1.csv");
  CHECK(slurp(ssim_result_file(run.res, 0)).rfind("residue,weight_num,weight_den\n", 0) == 0);
  REQUIRE(ssim_result_line_count(run.res) == 1);
  CHECK(std::string(ssim_result_line(run.res, 0)).rfind("PASS", 0) == 0);
  auto summary = nlohmann::json::parse(slurp(ssim_result_file(run.res, 3)));
  CHECK(summary["pass"] == true);
  CHECK(summary["files"].size() == 3);
}

TEST_CASE("config round trip and json fragments") {
  const fs::path out = scratch("inline");
  Run run;
  REQUIRE(ssim_config_new("measure", &run.cfg) == SSIM_OK);
  REQUIRE(ssim_config_set_json(run.cfg, "system", R"({"a":-0.5,"sigma":[[{"uniform":[-0.5,0.5]}]]})") == SSIM_OK);
  REQUIRE(ssim_config_set_double(run.cfg, "grid_step", 1e-3) == SSIM_OK);
  REQUIRE(ssim_config_set_string(run.cfg, "format", "json") == SSIM_OK);
  REQUIRE(ssim_config_set_string(run.cfg, "out", out.c_str()) == SSIM_OK);
  const std::string text = ssim_config_json(run.cfg);
  ssim_config* again = nullptr;
  REQUIRE(ssim_config_from_json(text.c_str(), &again) == SSIM_OK);
  CHECK(std::string(ssim_config_json(again)) == text);
  ssim_config_free(again);

  REQUIRE(ssim_run(run.cfg, &run.res) == SSIM_OK);
  // the infinite convolution of uniform kernels of width 2^-l lives in [-1, 1]
  CHECK(value(run.res, "mass") == doctest::Approx(1).epsilon(1e-9));
  auto j = nlohmann::json::parse(slurp(ssim_result_file(run.res, 0)));
  CHECK(j["origin"].get<double>() >= -1 - 1e-3);
  CHECK(j["step"].get<double>() == 1e-3);
}

TEST_CASE("status codes for numerical failures") {
  const fs::path out = scratch("fail");
  {
    Run run;
    REQUIRE(ssim_config_from_json(R"({"command":"measure","system":"silver-max","max_iter":2})", &run.cfg) == SSIM_OK);
    ssim_config_set_string(run.cfg, "out", out.c_str());
    CHECK(ssim_run(run.cfg, &run.res) == SSIM_ERR_NONCONVERGENCE);
    CHECK(std::string(ssim_last_error()).find("iterations 2") != std::string::npos);
  }
  {
    Run run;
    REQUIRE(ssim_config_from_json(R"({"command":"measure","system":"silver","depth":20})", &run.cfg) == SSIM_OK);
    ssim_config_set_string(run.cfg, "out", out.c_str());
    CHECK(ssim_run(run.cfg, &run.res) == SSIM_ERR_RESOURCE);
  }
  {
    Run run;
    REQUIRE(ssim_config_from_json(R"({"command":"padic","K":13})", &run.cfg) == SSIM_OK);
    ssim_config_set_string(run.cfg, "out", out.c_str());
    CHECK(ssim_run(run.cfg, &run.res) == SSIM_ERR_RESOURCE);
  }
}
