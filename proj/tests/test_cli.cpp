#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const double kS2 = std::sqrt(2.0);

struct Proc {
  int code;
  std::string out;
};

Proc cli(const std::string& args) {
  const std::string cmd = std::string(SELFSIM_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("selfsim_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("attractor examples") {
  const auto dir = scratch("attractor");
  auto p = cli("attractor --system silver-mc --out " + dir.string());
  REQUIRE(p.code == 0);
  auto rows = csv_rows(dir / "silver-mc-min_attractor.csv");
  REQUIRE(rows.size() == 2);
  // W1 = [1/sqrt2 - 1, 1/sqrt2], W2 = [-1/sqrt2, 1/sqrt2 - 1]
  CHECK(std::abs(rows[0][1] - (1 / kS2 - 1)) < 1e-12);
  CHECK(std::abs(rows[0][2] - 1 / kS2) < 1e-12);
  CHECK(std::abs(rows[1][1] + 1 / kS2) < 1e-12);
  CHECK(std::abs(rows[1][2] - (1 / kS2 - 1)) < 1e-12);
  auto log = csv_rows(dir / "silver-mc-min_convergence.csv");
  REQUIRE_FALSE(log.empty());
  CHECK(log.back()[1] < 1e-12);

  p = cli("attractor --system point --out " + dir.string());
  REQUIRE(p.code == 0);
  rows = csv_rows(dir / "point_attractor.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][1] == 0);
  CHECK(rows[0][2] == 0);

  p = cli("attractor --system ammann-beenker --out " + dir.string());
  REQUIRE(p.code == 0);
  rows = csv_rows(dir / "ammann-beenker_attractor.csv");
  REQUIRE(rows.size() == 8);
  // edge 1, flats on the axes: (+-1/2, +-(1+sqrt2)/2) and the swapped pairs
  const double h = (1 + kS2) / 2;
  std::vector<std::array<double, 2>> want;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      want.push_back({0.5 * sx, h * sy});
      want.push_back({h * sx, 0.5 * sy});
    }
  for (const auto& w : want) {
    double best = 1e9;
    for (const auto& r : rows) best = std::min(best, std::hypot(r[3] - w[0], r[4] - w[1]));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("measure, fourier, weyl and padic examples") {
  const auto dir = scratch("commands");
  auto p = cli("padic --K 5 --out " + dir.string());
  CHECK(p.code == 0);
  CHECK(p.out.rfind("PASS", 0) == 0);

  p = cli("measure --system silver-max --out " + dir.string());
  REQUIRE(p.code == 0);
  CHECK(p.out.find("mass 1.000000") != std::string::npos);
  auto s = nlohmann::json::parse(slurp(dir / "silver-max_measure_summary.json"));
  CHECK(std::abs(s["values"]["mass"].get<double>() - 1) < 1e-6);

  p = cli("weyl --system silver --radii 100,1000,5000 --out " + dir.string());
  REQUIRE(p.code == 0);
  auto rows = csv_rows(dir / "silver-min_weyl.csv");
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r[3] == doctest::Approx(0.5));
  CHECK(rows[1][4] < rows[0][4]);
  CHECK(rows[2][4] < rows[1][4]);

  p = cli("fourier --system silver-max --k 0,0.5,1,2,5 --terms 40 --out " + dir.string());
  REQUIRE(p.code == 0);
  rows = csv_rows(dir / "silver-max_fourier.csv");
  REQUIRE(rows.size() == 5);
  // oracle: prod_l sin(2 pi t)/(2 pi t), t = (1 - sqrt2)^l (sqrt2 - 1) k
  for (const auto& r : rows) {
    double prod = 1, t = (kS2 - 1) * r[0];
    for (int l = 0; l < 40; ++l, t *= 1 - kS2)
      if (t != 0) prod *= std::sin(2 * M_PI * t) / (2 * M_PI * t);
    CHECK(std::abs(r[1] - prod) < 1e-12);
    CHECK(std::abs(r[2]) < 1e-12);
  }
}

TEST_CASE("json format mirrors csv") {
  const auto a = scratch("csv"), b = scratch("json");
  REQUIRE(cli("weyl --system silver --radii 100,1000 --out " + a.string()).code == 0);
  REQUIRE(cli("weyl --system silver --radii 100,1000 --format json --out " + b.string()).code == 0);
  auto rows = csv_rows(a / "silver-min_weyl.csv");
  auto j = nlohmann::json::parse(slurp(b / "silver-min_weyl.json"));
  REQUIRE(j["components"][0].size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(j["components"][0][i]["radius"].get<double>() == rows[i][0]);
    CHECK(j["components"][0][i]["abs_error"].get<double>() == rows[i][4]);
  }
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream c(dir / "run.json");
    c << R"({"command":"measure","system":"silver-mc-max","grid_step":0.001,"out":")" << (dir / "x").string()
      << R"("})";
  }
  auto p = cli("measure --config " + (dir / "run.json").string() + " --grid-step 0.0005");
  REQUIRE(p.code == 0);
  auto m = nlohmann::json::parse(slurp(dir / "x" / "silver-mc-max_density.json"));
  CHECK(m["grid"]["step"].get<double>() == 0.0005);
  CHECK(m["files"].size() == 2);
}

TEST_CASE("deterministic output") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(cli("measure --system silver-mc-max --out " + d.string()).code == 0);
    REQUIRE(cli("attractor --system silver-mc-max --out " + d.string()).code == 0);
    REQUIRE(cli("fourier --system silver-mc --out " + d.string()).code == 0);
  }
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  const std::string out = " --out " + dir.string();
  CHECK(cli("attractor --system nope" + out).code == 1);
  CHECK(cli("measure --system silver-max --tol -1" + out).code == 1);
  CHECK(cli("measure --system silver-max --format xml" + out).code == 1);
  CHECK(cli("measure --config /nonexistent.json" + out).code == 1);
  CHECK(cli("").code == 1);
  CHECK(cli("measure --system silver-max --max-iter 2" + out).code == 2);
  CHECK(cli("measure --system silver-max --grid-step 1e-9" + out).code == 3);
  CHECK(cli("padic --K 13" + out).code == 3);
  CHECK(cli("--help").code == 0);
  auto l = cli("list");
  CHECK(l.code == 0);
  CHECK(l.out == "silver-min\nsilver-max\nsilver-mc-min\nsilver-mc-max\nammann-beenker\nternary-padic\n");
}
