#include "selfsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/measures.hpp"
#include "selfsim/modelsets.hpp"
#include "selfsim/padic.hpp"

namespace selfsim {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

const double kS2 = std::sqrt(2.0);
const double kA = 1 - kS2;
const QuadRat qa(kSilverStar);
const QuadRat qh(0, 1, 2);

enum class Kind { line, line_mc, plane, padic };

const std::vector<std::string> kBuiltins = {"silver-min",    "silver-max",     "silver-mc-min",
                                            "silver-mc-max", "ammann-beenker", "ternary-padic"};

[[noreturn]] void config_error(const std::string& msg) { throw ConfigError(msg); }

ExactIntervalSet exact_w() { return {-qh, qh}; }
ExactIntervalSet exact_w1() { return {qh - QuadRat(1), qh}; }
ExactIntervalSet exact_w2() { return {-qh, qh - QuadRat(1)}; }

// Everything a driver needs about one system.
struct SystemData {
  std::string name;
  Kind kind = Kind::line;
  double a = kA;
  std::optional<ExactIfs1D> exact_ifs;
  std::optional<Ifs1D> ifs;
  std::optional<Ifs2D> ifs2;
  std::vector<ExactIntervalSet> exact_windows;
  std::vector<IntervalSet> windows;
  std::vector<std::vector<MCSystem::Entry>> sigma;
  std::optional<Eigen::VectorXd> m;
  std::optional<ExactFiniteSystem> nonoverlap;  // counting system with indicator densities
  std::vector<IntervalSet> seeds;
};

ExactIfs1D exact_line(std::vector<std::vector<ExactIfs1D::Entry>> e) { return ExactIfs1D(std::move(e)); }

std::vector<std::vector<ExactIfs1D::Entry>> entries(std::size_t n) {
  return std::vector<std::vector<ExactIfs1D::Entry>>(n, std::vector<ExactIfs1D::Entry>(n));
}

FiniteFamily atoms_of(std::vector<Atom> a) { return FiniteFamily{DiscreteMeasure(std::move(a))}; }

SystemData builtin(const std::string& name) {
  SystemData d;
  d.name = name;
  if (name == "point") {
    std::vector<std::vector<Ifs1D::Entry>> e(1, std::vector<Ifs1D::Entry>(1));
    e[0][0].maps = {{0, 0}};
    d.ifs = Ifs1D(e);
    d.a = 0;
    d.sigma = {{PointMassFamily{0, 1}}};
    d.seeds = {IntervalSet(-1, 1)};
    d.exact_windows = {ExactIntervalSet::point(QuadRat(0))};
    auto x = entries(1);
    x[0][0].maps = {{QuadRat(0), QuadRat(0)}};
    d.exact_ifs = exact_line(x);
  } else if (name == "silver-min") {
    auto e = entries(1);
    e[0][0].maps = {{qa, qa}, {qa, QuadRat(0)}, {qa, -qa}};
    d.exact_ifs = exact_line(e);
    d.exact_windows = {exact_w()};
    d.sigma = {{atoms_of({{kA, 1.0 / 3}, {0, 1.0 / 3}, {-kA, 1.0 / 3}})}};
    d.seeds = {IntervalSet(-1, 1)};
  } else if (name == "silver-max") {
    auto e = entries(1);
    e[0][0].swept = {{{qa, QuadRat(0)}, ExactIntervalSet(qa, -qa)}};
    d.exact_ifs = exact_line(e);
    d.exact_windows = {exact_w()};
    d.sigma = {{UniformFamily{IntervalSet(kA, -kA), 1.0}}};
    d.seeds = {IntervalSet(-1, 1)};
  } else if (name == "silver-mc-min") {
    d.kind = Kind::line_mc;
    auto e = entries(2);
    e[0][0].maps = {{qa, QuadRat(0)}, {qa, qa + QuadRat(1)}};
    e[0][1].maps = {{qa, QuadRat(0)}};
    e[1][0].maps = {{qa, qa}};
    d.exact_ifs = exact_line(e);
    d.exact_windows = {exact_w1(), exact_w2()};
    const double r = -kA;
    d.sigma = {{atoms_of({{0, r}, {1 + kA, r}}), atoms_of({{0, r}})},
               {atoms_of({{kA, r}}), std::nullopt}};
    ExactFiniteSystem s;
    s.a = qa;
    s.translations = {{{QuadRat(0), qa + QuadRat(1)}, {QuadRat(0)}}, {{qa}, {}}};
    const QuadRat qr = -qa;
    s.s = {{qr * QuadRat(2), qr}, {qr, QuadRat(0)}};
    s.m = {QuadRat(1), qr};
    d.nonoverlap = s;
    d.seeds = {IntervalSet(-1, 1), IntervalSet(-1, 1)};
  } else if (name == "silver-mc-max") {
    d.kind = Kind::line_mc;
    // F'22 is left empty, as published; the literal erosion of (W2, W2) is
    // the nonempty interval [2 alpha*, sqrt2 - 2].
    auto e = entries(2);
    e[0][0].swept = {{{qa, QuadRat(0)}, ExactIntervalSet(QuadRat(0), QuadRat(1) + qa)}};
    e[0][1].swept = {{{qa, QuadRat(0)}, ExactIntervalSet(qa, -qa)}};
    e[1][0].maps = {{qa, qa}};
    d.exact_ifs = exact_line(e);
    d.exact_windows = {exact_w1(), exact_w2()};
    d.sigma = {{UniformFamily{IntervalSet(0, 1 + kA), (1 - kA) * (1 + kA)}, UniformFamily{IntervalSet(kA, -kA), -kA}},
               {PointMassFamily{kA, -kA}, std::nullopt}};
    d.seeds = {IntervalSet(-1, 1), IntervalSet(-1, 1)};
  } else if (name == "ammann-beenker") {
    d.kind = Kind::plane;
    std::vector<std::vector<Ifs2D::Entry>> e(1, std::vector<Ifs2D::Entry>(1));
    e[0][0].swept = {{AffineMap2D{kA * Eigen::Matrix2d::Identity(), Point2::Zero()},
                      PolygonRegion(scaled(regular_octagon(1), 2 - kS2))}};
    d.ifs2 = Ifs2D(e);
  } else if (name == "ternary-padic") {
    d.kind = Kind::padic;
  } else {
    config_error("unknown system '" + name + "'");
  }
  if (d.exact_ifs) d.ifs = to_double(*d.exact_ifs);
  for (const auto& w : d.exact_windows) d.windows.push_back(to_double(w));
  return d;
}

SystemData from_inline(const InlineSystem& s) {
  SystemData d;
  d.name = "inline";
  const std::size_t n = s.sigma.size();
  d.kind = n == 1 ? Kind::line : Kind::line_mc;
  d.a = s.a;
  d.sigma = s.sigma;
  d.m = s.m;
  d.windows = s.windows;
  std::vector<std::vector<Ifs1D::Entry>> e(n, std::vector<Ifs1D::Entry>(n));
  double reach = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto& x = e[i][j];
      if (!s.maps.empty()) {
        for (double v : s.maps[i][j]) {
          x.maps.push_back({s.a, v});
          reach = std::max(reach, std::abs(v));
        }
        continue;
      }
      if (!s.sigma[i][j]) continue;
      std::visit(
          [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, UniformFamily>) {
              x.swept.push_back({AffineMap1D{s.a, 0}, f.region});
              reach = std::max({reach, std::abs(f.region.min()), std::abs(f.region.max())});
            } else if constexpr (std::is_same_v<T, PointMassFamily>) {
              x.maps.push_back({s.a, f.location});
              reach = std::max(reach, std::abs(f.location));
            } else {
              for (const auto& t : f.atoms.atoms()) {
                x.maps.push_back({s.a, t.x});
                reach = std::max(reach, std::abs(t.x));
              }
            }
          },
          *s.sigma[i][j]);
    }
  d.ifs = Ifs1D(e);
  const double b = reach / (1 - std::abs(s.a)) + 1;
  d.seeds.assign(n, IntervalSet(-b, b));
  return d;
}

// --- config parsing ---

double get_number(const json& j, const char* what) {
  if (!j.is_number()) config_error(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(std::string(what) + " must be finite");
  return v;
}

double get_positive(const json& j, const char* what) {
  const double v = get_number(j, what);
  if (!(v > 0)) config_error(std::string(what) + " must be positive");
  return v;
}

int get_positive_int(const json& j, const char* what) {
  if (!j.is_number_integer()) config_error(std::string(what) + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v <= 0 || v > 1000000000) config_error(std::string(what) + " must be a positive integer");
  return static_cast<int>(v);
}

std::vector<double> get_list(const json& j, const char* what, bool positive) {
  if (!j.is_array() || j.empty()) config_error(std::string(what) + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(positive ? get_positive(x, what) : get_number(x, what));
  return out;
}

IntervalSet get_interval(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) config_error(std::string(what) + " must be [lo, hi]");
  const double lo = get_number(j[0], what), hi = get_number(j[1], what);
  if (hi < lo) config_error(std::string(what) + " has lo > hi");
  return IntervalSet(lo, hi);
}

MCSystem::Entry get_family(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object()) config_error("sigma entries are objects or null");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "uniform" && it.key() != "point" && it.key() != "atoms" && it.key() != "mass")
      config_error("unknown sigma key '" + it.key() + "'");
  const int kinds = static_cast<int>(j.contains("uniform")) + j.contains("point") + j.contains("atoms");
  if (kinds != 1) config_error("a sigma entry needs exactly one of uniform, point, atoms");
  if (j.contains("atoms")) {
    if (j.contains("mass")) config_error("atoms carry their own weights");
    if (!j["atoms"].is_array() || j["atoms"].empty()) config_error("atoms must be a nonempty array");
    std::vector<Atom> a;
    for (const auto& t : j["atoms"]) {
      if (!t.is_array() || t.size() != 2) config_error("atoms are [x, weight] pairs");
      a.push_back({get_number(t[0], "atom position"), get_positive(t[1], "atom weight")});
    }
    return atoms_of(std::move(a));
  }
  const double mass = j.contains("mass") ? get_positive(j["mass"], "sigma mass") : 1.0;
  if (j.contains("point")) return PointMassFamily{get_number(j["point"], "point"), mass};
  auto r = get_interval(j["uniform"], "uniform");
  if (r.max() == r.min()) config_error("uniform region has zero length; use point");
  return UniformFamily{r, mass};
}

Eigen::MatrixXd get_matrix(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) config_error(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) config_error(std::string(what) + " rows have the wrong length");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = get_number(j[i][k], what);
  }
  return m;
}

InlineSystem get_inline(const json& j) {
  static const std::set<std::string> keys = {"a", "sigma", "maps", "windows", "m", "s"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) config_error("unknown system key '" + it.key() + "'");
  if (!j.contains("a") || !j.contains("sigma")) config_error("an inline system needs a and sigma");
  InlineSystem s;
  s.a = get_number(j["a"], "a");
  if (!(std::abs(s.a) > 0 && std::abs(s.a) < 1)) config_error("a must satisfy 0 < |a| < 1");
  const json& sg = j["sigma"];
  if (!sg.is_array() || sg.empty()) config_error("sigma must be a nonempty square array");
  const std::size_t n = sg.size();
  for (const auto& row : sg) {
    if (!row.is_array() || row.size() != n) config_error("sigma must be square");
    std::vector<MCSystem::Entry> r;
    for (const auto& e : row) r.push_back(get_family(e));
    s.sigma.push_back(std::move(r));
  }
  if (j.contains("maps")) {
    const json& mp = j["maps"];
    if (!mp.is_array() || mp.size() != n) config_error("maps must match sigma");
    for (const auto& row : mp) {
      if (!row.is_array() || row.size() != n) config_error("maps must match sigma");
      std::vector<std::vector<double>> r;
      for (const auto& e : row) {
        if (!e.is_array()) config_error("maps entries are arrays of translations");
        std::vector<double> v;
        for (const auto& x : e) v.push_back(get_number(x, "translation"));
        r.push_back(std::move(v));
      }
      s.maps.push_back(std::move(r));
    }
  }
  if (j.contains("windows")) {
    if (!j["windows"].is_array() || j["windows"].size() != n) config_error("one window per component");
    for (const auto& w : j["windows"]) s.windows.push_back(get_interval(w, "window"));
  }
  if (j.contains("m")) {
    auto v = get_list(j["m"], "m", true);
    if (v.size() != n) config_error("m must have one entry per component");
    s.m = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  }
  if (j.contains("s")) s.s = get_matrix(j["s"], n, "s");
  return s;
}

const std::set<std::string> kCommands = {"attractor", "measure", "fourier", "weyl", "padic"};

// --- output helpers ---

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + p.string() + ": " + ec.message());
}

std::string write_text(const fs::path& dir, const std::string& file, const std::string& text,
                       RunReport& rep) {
  const fs::path p = dir / file;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << text;
  if (!os) throw ConfigError("write failed for " + p.string());
  rep.files.push_back(p.string());
  return p.string();
}

std::string fmt(double x) { return format_double(x); }

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Node budgets for density grids.
constexpr double kMaxNodes1D = 5e7;
constexpr double kMaxNodes2D = 1.6e7;

void check_grid(double width, double step, int dim) {
  const double n = std::pow(width / step + 1, dim);
  if (n > (dim == 1 ? kMaxNodes1D : kMaxNodes2D))
    throw ResourceError("grid of " + format_double(n) + " nodes exceeds the cap");
}

SolveOptions solve_options(const ExperimentConfig& c, double step, double width, int dim = 1) {
  SolveOptions o;
  o.step = c.grid_step.value_or(step);
  check_grid(width, o.step, dim);
  o.tol = c.tol.value_or(1e-8);
  o.max_iter = c.max_iter.value_or(500);
  return o;
}

// Width of the seed hull, which contains every component.
double span(const SystemData& d) {
  double w = 0;
  for (const auto& s : d.seeds) w = std::max(w, s.max() - s.min());
  return w;
}

MCSystem mc_system(const SystemData& d) { return MCSystem(d.a, d.sigma, d.m); }

// --- drivers ---

void cmd_attractor(const ExperimentConfig& c, const SystemData& d, const fs::path& dir, RunReport& rep) {
  const double tol = c.tol.value_or(1e-12);
  const int max_iter = c.max_iter.value_or(kDefaultAttractorMaxIter);
  const std::string stem = d.name;
  std::ostringstream log;
  log << "iteration,delta\n";
  ojson js;
  js["system"] = d.name;
  if (d.kind == Kind::plane) {
    const auto sq = ConvexPolygon::hull({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}});
    auto r = iterate_attractor(*d.ifs2, {PolygonRegion(sq)}, tol, max_iter);
    std::ostringstream os;
    os << "component,part,vertex,x,y\n";
    ojson comps = ojson::array();
    for (std::size_t i = 0; i < r.components.size(); ++i) {
      ojson parts = ojson::array();
      const auto& ps = r.components[i].parts();
      for (std::size_t p = 0; p < ps.size(); ++p) {
        ojson verts = ojson::array();
        for (std::size_t v = 0; v < ps[p].vertices().size(); ++v) {
          const Point2& q = ps[p].vertices()[v];
          os << i + 1 << ',' << p + 1 << ',' << v + 1 << ',' << fmt(q.x()) << ',' << fmt(q.y()) << '\n';
          verts.push_back({q.x(), q.y()});
        }
        parts.push_back(verts);
      }
      comps.push_back(parts);
    }
    // distance to the regular octagon of edge 1
    const auto oct = regular_octagon(1);
    double err = INFINITY;
    if (r.components[0].parts().size() == 1 && r.components[0].parts()[0].vertices().size() == 8) {
      err = 0;
      for (const auto& v : oct.vertices()) {
        double best = INFINITY;
        for (const auto& u : r.components[0].parts()[0].vertices()) best = std::min(best, (u - v).norm());
        err = std::max(err, best);
      }
    }
    rep.values["octagon_vertex_error"] = err;
    rep.lines.push_back("component 1: " + std::to_string(r.components[0].parts().size()) + " part(s), octagon vertex error " + sci(err));
    for (std::size_t k = 0; k < r.deltas.size(); ++k) log << k + 1 << ',' << fmt(r.deltas[k]) << '\n';
    rep.values["iterations"] = r.iterations;
    rep.values["final_delta"] = r.final_delta;
    if (c.format == "csv") {
      write_text(dir, stem + "_attractor.csv", os.str(), rep);
      write_text(dir, stem + "_convergence.csv", log.str(), rep);
    } else {
      js["components"] = comps;
      js["iterations"] = r.iterations;
      js["deltas"] = r.deltas;
      write_text(dir, stem + "_attractor.json", js.dump(1) + "\n", rep);
    }
    return;
  }
  auto r = iterate_attractor(*d.ifs, d.seeds, tol, max_iter);
  std::ostringstream os;
  os << "component,lo,hi\n";
  ojson comps = ojson::array();
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    ojson parts = ojson::array();
    for (const auto& p : r.components[i].intervals()) {
      os << i + 1 << ',' << fmt(p.lo) << ',' << fmt(p.hi) << '\n';
      parts.push_back({p.lo, p.hi});
    }
    comps.push_back(parts);
    rep.lines.push_back("component " + std::to_string(i + 1) + ": " + to_string(r.components[i]));
  }
  for (std::size_t k = 0; k < r.deltas.size(); ++k) log << k + 1 << ',' << fmt(r.deltas[k]) << '\n';
  rep.values["iterations"] = r.iterations;
  rep.values["final_delta"] = r.final_delta;
  if (!d.windows.empty()) {
    double err = 0;
    for (std::size_t i = 0; i < d.windows.size(); ++i)
      err = std::max(err, hausdorff_distance(r.components[i], d.windows[i]));
    rep.values["window_error"] = err;
    rep.lines.push_back("distance to the exact windows " + sci(err));
  }
  if (d.exact_ifs && !d.exact_windows.empty()) {
    const bool ok = verify_exact_fixed_point(*d.exact_ifs, d.exact_windows).holds;
    rep.values["exact_fixed_point"] = ok ? 1 : 0;
    rep.lines.push_back(std::string("exact fixed point: ") + (ok ? "holds" : "fails"));
    rep.pass = ok;
  }
  if (c.format == "csv") {
    write_text(dir, stem + "_attractor.csv", os.str(), rep);
    write_text(dir, stem + "_convergence.csv", log.str(), rep);
  } else {
    js["components"] = comps;
    js["iterations"] = r.iterations;
    js["deltas"] = r.deltas;
    write_text(dir, stem + "_attractor.json", js.dump(1) + "\n", rep);
  }
}

void write_atoms(const ExperimentConfig& c, const std::string& stem, const DiscreteMeasure& m,
                 const fs::path& dir, RunReport& rep) {
  rep.values["mass"] = m.total_mass();
  rep.values["atoms"] = static_cast<double>(m.size());
  rep.lines.push_back("mass " + fixed6(m.total_mass()) + ", " + std::to_string(m.size()) + " atoms");
  if (c.format == "csv") {
    std::ostringstream os;
    os << "x,weight\n";
    for (const auto& a : m.atoms()) os << fmt(a.x) << ',' << fmt(a.w) << '\n';
    write_text(dir, stem + "_atoms.csv", os.str(), rep);
  } else {
    ojson j;
    std::vector<double> x, w;
    for (const auto& a : m.atoms()) {
      x.push_back(a.x);
      w.push_back(a.w);
    }
    j["x"] = x;
    j["weight"] = w;
    j["mass"] = m.total_mass();
    write_text(dir, stem + "_atoms.json", j.dump() + "\n", rep);
  }
}

// Nodes step*k inside w carry weight 1.
GridDensity1D indicator_grid(const IntervalSet& w, double step) {
  const auto k0 = static_cast<std::int64_t>(std::ceil(w.min() / step - 1e-9));
  const auto k1 = static_cast<std::int64_t>(std::floor(w.max() / step + 1e-9));
  GridDensity1D g;
  g.step = step;
  g.origin = static_cast<double>(k0) * step;
  for (std::int64_t k = k0; k <= k1; ++k) g.weights.push_back(w.contains(static_cast<double>(k) * step) ? 1.0 : 0.0);
  return g;
}

void write_mc(const ExperimentConfig& c, const std::string& stem, const MCDensity& md, const fs::path& dir,
              RunReport& rep) {
  for (std::size_t i = 0; i < md.components.size(); ++i) {
    const std::string key = "mass_" + std::to_string(i + 1);
    rep.values[key] = md.masses[i];
    rep.lines.push_back(key + " " + fixed6(md.masses[i]));
  }
  rep.values["iterations"] = md.iterations;
  if (c.format == "csv") {
    const auto manifest = write_mc_density(dir, stem + "_density", md);
    for (std::size_t i = 0; i < md.components.size(); ++i)
      rep.files.push_back((dir / (stem + "_density_" + std::to_string(i + 1) + ".csv")).string());
    rep.files.push_back(manifest.string());
  } else {
    ojson j;
    j["n"] = md.components.size();
    j["masses"] = md.masses;
    j["iterations"] = md.iterations;
    ojson comps = ojson::array();
    for (const auto& g : md.components) comps.push_back(ojson::parse(to_json(g)));
    j["components"] = comps;
    write_text(dir, stem + "_density.json", j.dump() + "\n", rep);
  }
}

void cmd_padic(const ExperimentConfig& c, const fs::path& dir, RunReport& rep) {
  const int K = c.K.value_or(kDefaultPadicPrecision);
  const auto sol = solve_padic_system(K, c.max_iter.value_or(50));
  const bool ok = sol.omega == padic_closed_form(K, sol.m);
  rep.pass = ok;
  rep.values["K"] = K;
  rep.values["iterations"] = sol.iterations;
  rep.values["closed_form"] = ok ? 1 : 0;
  if (c.format == "csv") {
    for (std::size_t i = 0; i < sol.omega.size(); ++i) {
      std::ostringstream os;
      write_padic_csv(os, sol.omega[i]);
      write_text(dir, "ternary-padic_omega_" + std::to_string(i + 1) + ".csv", os.str(), rep);
    }
  } else {
    write_text(dir, "ternary-padic_omega.json", padic_to_json(sol) + "\n", rep);
  }
  rep.lines.push_back(std::string(ok ? "PASS" : "FAIL") + " closed form 9*1_{9Z3+c_i} with c = (1,3,0) at K=" +
                      std::to_string(K));
}

void cmd_measure(const ExperimentConfig& c, const SystemData& d, const fs::path& dir, RunReport& rep) {
  const std::string stem = d.name;
  if (d.kind == Kind::padic) return cmd_padic(c, dir, rep);
  if (d.kind == Kind::plane) {
    SolveOptions o = solve_options(c, (1 + kS2) / 511, 1 + kS2, 2);
    UniformFamily2D nu{PolygonRegion(scaled(regular_octagon(1), 2 - kS2)), 1.0};
    auto r = solve_density_2d(nu, kA, o);
    rep.values["mass"] = r.density.mass();
    rep.values["iterations"] = r.iterations;
    rep.values["final_delta"] = r.final_delta;
    rep.lines.push_back("mass " + fixed6(r.density.mass()) + ", grid " + std::to_string(r.density.nx) + "x" +
                        std::to_string(r.density.ny) + ", " + std::to_string(r.iterations) + " iterations");
    if (c.format == "csv") {
      std::ostringstream os;
      write_csv(os, r.density);
      write_text(dir, stem + "_density.csv", os.str(), rep);
    } else {
      write_text(dir, stem + "_density.json", to_json(r.density) + "\n", rep);
    }
    return;
  }
  if (d.kind == Kind::line) {
    const auto& nu = *d.sigma[0][0];
    if (!std::holds_alternative<UniformFamily>(nu)) {
      // singular: truncated atomic approximant
      DiscreteMeasure base = std::holds_alternative<FiniteFamily>(nu)
                                 ? std::get<FiniteFamily>(nu).atoms
                                 : DiscreteMeasure::dirac(std::get<PointMassFamily>(nu).location,
                                                          std::get<PointMassFamily>(nu).mass);
      const DiscreteMeasure m = d.a == 0 ? base : solve_invariant_atoms(base, d.a, c.depth.value_or(8));
      return write_atoms(c, stem, m, dir, rep);
    }
    auto r = solve_density(nu, d.a, solve_options(c, 1e-4, span(d)));
    rep.values["mass"] = r.density.mass();
    rep.values["iterations"] = r.iterations;
    rep.values["final_delta"] = r.final_delta;
    const double res = fixed_point_residual(nu, d.a, r.density);
    rep.values["residual"] = res;
    rep.lines.push_back("mass " + fixed6(r.density.mass()) + ", " + std::to_string(r.iterations) +
                        " iterations, residual " + sci(res));
    if (c.format == "csv") {
      std::ostringstream os;
      write_csv(os, r.density);
      write_text(dir, stem + "_density.csv", os.str(), rep);
    } else {
      ojson j = ojson::parse(to_json(r.density));
      j["iterations"] = r.iterations;
      j["residual"] = res;
      write_text(dir, stem + "_density.json", j.dump() + "\n", rep);
    }
    return;
  }
  if (d.nonoverlap) {
    // non-overlapping: the densities are the window indicators
    const double step = c.grid_step.value_or(2e-4);
    check_grid(2, step, 1);
    MCDensity md;
    for (const auto& w : d.windows) {
      md.components.push_back(indicator_grid(w, step));
      md.masses.push_back(md.components.back().mass());
    }
    const double res = indicator_density_identity(*d.nonoverlap, d.exact_windows, step);
    rep.values["identity_residual"] = res;
    rep.lines.push_back("indicator identity residual " + sci(res));
    return write_mc(c, stem, md, dir, rep);
  }
  auto md = solve_mc_density(mc_system(d), solve_options(c, 2e-4, span(d)));
  write_mc(c, stem, md, dir, rep);
}

std::vector<double> fourier_points(const ExperimentConfig& c) {
  if (!c.k.empty()) return c.k;
  std::vector<double> k;
  for (int i = 0; i <= 100; ++i) k.push_back(0.05 * i);
  return k;
}

void cmd_fourier(const ExperimentConfig& c, const SystemData& d, const fs::path& dir, RunReport& rep) {
  const int terms = c.terms.value_or(40);
  const auto ks = fourier_points(c);
  const std::string stem = d.name;
  std::ostringstream os;
  ojson j;
  std::vector<std::vector<double>> re, im;
  if (d.kind == Kind::line) {
    os << "k,re,im\n";
    re.resize(1);
    im.resize(1);
    for (double k : ks) {
      const auto v = fourier_hat(*d.sigma[0][0], d.a, k, terms);
      os << fmt(k) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
      re[0].push_back(v.real());
      im[0].push_back(v.imag());
    }
  } else {
    const MCSystem sys = mc_system(d);
    os << "component,k,re,im\n";
    re.resize(sys.size());
    im.resize(sys.size());
    std::vector<std::vector<std::complex<double>>> rows;
    for (double k : ks) rows.push_back(mc_fourier_hat(sys, k, terms));
    for (std::size_t i = 0; i < sys.size(); ++i)
      for (std::size_t t = 0; t < ks.size(); ++t) {
        const auto v = rows[t][i];
        os << i + 1 << ',' << fmt(ks[t]) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
        re[i].push_back(v.real());
        im[i].push_back(v.imag());
      }
  }
  rep.values["points"] = static_cast<double>(ks.size());
  rep.values["terms"] = terms;
  rep.lines.push_back(std::to_string(ks.size()) + " frequencies, " + std::to_string(terms) + " product terms");
  if (c.format == "csv") {
    write_text(dir, stem + "_fourier.csv", os.str(), rep);
  } else {
    j["k"] = ks;
    ojson comps = ojson::array();
    for (std::size_t i = 0; i < re.size(); ++i) comps.push_back({{"re", re[i]}, {"im", im[i]}});
    j["components"] = comps;
    j["terms"] = terms;
    write_text(dir, stem + "_fourier.json", j.dump() + "\n", rep);
  }
}

std::string weyl_text(const std::vector<WeylRow>& rows) {
  std::ostringstream os;
  write_weyl_csv(os, rows);
  return os.str();
}

ojson weyl_json(const std::vector<WeylRow>& rows) {
  ojson a = ojson::array();
  for (const auto& r : rows)
    a.push_back({{"radius", r.radius}, {"center", r.center}, {"average", r.average}, {"limit", r.limit},
                 {"abs_error", r.abs_error}});
  return a;
}

void cmd_weyl(const ExperimentConfig& c, const SystemData& d, const fs::path& dir, RunReport& rep) {
  const std::vector<double> centers = c.centers.empty() ? std::vector<double>{0} : c.centers;
  double far = 0;
  for (double x : centers) far = std::max(far, std::abs(x));
  const std::string stem = d.name;
  std::vector<std::vector<WeylRow>> tables;

  if (d.kind == Kind::plane) {
    const std::vector<double> radii = c.radii.empty() ? std::vector<double>{10, 20, 40} : c.radii;
    const auto scheme = CutProjectScheme::ammann_beenker();
    const PolygonRegion oct(regular_octagon(1));
    double rmax = 0;
    for (double r : radii) rmax = std::max(rmax, r);
    if (rmax + far > 1000) throw ResourceError("plane patch radius above 1000 exceeds the enumeration cap");
    const auto pts = project_points(scheme, oct, rmax + far);
    std::vector<Point2> xs;
    for (const auto& p : pts) xs.push_back(embed(p));
    const double limit = theoretical_density(scheme, CompactSet(oct));
    std::vector<WeylRow> rows;
    for (double ctr : centers)
      for (double r : radii) {
        const Point2 o(ctr, 0);
        std::size_t n = 0;
        for (const auto& x : xs)
          if ((x - o).norm() <= r) ++n;
        const double avg = static_cast<double>(n) / (M_PI * r * r);
        rows.push_back({r, ctr, avg, limit, std::abs(avg - limit)});
      }
    tables.push_back(rows);
  } else {
    const std::vector<double> radii = c.radii.empty() ? std::vector<double>{100, 1000, 5000} : c.radii;
    double rmax = 0;
    for (double r : radii) rmax = std::max(rmax, r);
    const auto scheme = CutProjectScheme::silver();
    const double reach = rmax + far;
    if (reach > 1e8) throw ResourceError("patch radius above 1e8 exceeds the enumeration cap");
    IntervalSet all = d.windows[0];
    for (const auto& w : d.windows) all.unite(w);
    const Patch p = make_patch(project_points(scheme, all, reach), reach);
    const bool weighted = std::any_of(d.sigma.begin(), d.sigma.end(), [](const auto& row) {
      return std::any_of(row.begin(), row.end(), [](const auto& e) { return e && std::holds_alternative<UniformFamily>(*e); });
    });
    if (d.kind == Kind::line && weighted) {
      auto g = solve_density(*d.sigma[0][0], d.a, solve_options(c, 1e-4, span(d))).density;
      tables.push_back(weyl_average(p, g, scheme, radii, centers));
    } else if (d.kind == Kind::line_mc && weighted) {
      auto md = solve_mc_density(mc_system(d), solve_options(c, 2e-4, span(d)));
      for (const auto& g : md.components) tables.push_back(weyl_average(p, g, scheme, radii, centers));
    } else {
      for (const auto& w : d.windows) {
        const double meas = w.measure();
        if (d.windows.size() == 1) {
          tables.push_back(weyl_count(p, meas, scheme, radii, centers));
        } else {
          // Lambda_i as a subset of the patch: indicator of W_i on the star side
          tables.push_back(weyl_average(p, [w](double y) { return w.contains(y) ? 1.0 : 0.0; },
                                        meas / covolume(scheme), radii, centers));
        }
      }
    }
  }
  ojson j;
  j["system"] = d.name;
  ojson comps = ojson::array();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& last = tables[i].back();
    const std::string key = tables.size() == 1 ? "abs_error" : "abs_error_" + std::to_string(i + 1);
    rep.values[key] = last.abs_error;
    rep.lines.push_back((tables.size() == 1 ? std::string() : "component " + std::to_string(i + 1) + ": ") +
                        "limit " + fixed6(last.limit) + ", abs_error " + sci(last.abs_error) + " at radius " +
                        fmt(last.radius));
    if (c.format == "csv") {
      const std::string name = tables.size() == 1 ? stem + "_weyl.csv" : stem + "_weyl_" + std::to_string(i + 1) + ".csv";
      write_text(dir, name, weyl_text(tables[i]), rep);
    }
    comps.push_back(weyl_json(tables[i]));
  }
  if (c.format == "json") {
    j["components"] = comps;
    write_text(dir, stem + "_weyl.json", j.dump(1) + "\n", rep);
  }
}

SystemData system_of(const ExperimentConfig& c) {
  return c.inline_system ? from_inline(*c.inline_system) : builtin(c.system);
}

}  // namespace

std::vector<std::string> builtin_names() { return kBuiltins; }

std::string canonical_system(const std::string& name) {
  if (name == "silver") return "silver-min";
  if (name == "silver-mc") return "silver-mc-min";
  return name;
}

bool is_known_system(const std::string& name) {
  const std::string c = canonical_system(name);
  return c == "point" || std::find(kBuiltins.begin(), kBuiltins.end(), c) != kBuiltins.end();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> keys = {"command", "system", "tol",   "grid_step", "radius",
                                             "radii",   "centers", "k",    "terms",     "K",
                                             "max_iter", "depth",  "out",  "format"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) config_error("unknown config key '" + it.key() + "'");
  ExperimentConfig c;
  if (!j.contains("command") || !j["command"].is_string()) config_error("command is required");
  c.command = j["command"].get<std::string>();
  if (j.contains("system")) {
    const json& s = j["system"];
    if (s.is_string()) {
      c.system = canonical_system(s.get<std::string>());
    } else if (s.is_object()) {
      c.system = "inline";
      c.inline_system = get_inline(s);
    } else {
      config_error("system must be a builtin name or an object");
    }
  } else if (c.command == "padic") {
    c.system = "ternary-padic";
  } else {
    config_error("system is required");
  }
  if (j.contains("tol")) c.tol = get_positive(j["tol"], "tol");
  if (j.contains("grid_step")) c.grid_step = get_positive(j["grid_step"], "grid_step");
  if (j.contains("radius") && j.contains("radii")) config_error("give radius or radii, not both");
  if (j.contains("radius")) c.radii = {get_positive(j["radius"], "radius")};
  if (j.contains("radii")) c.radii = get_list(j["radii"], "radii", true);
  if (j.contains("centers")) c.centers = get_list(j["centers"], "centers", false);
  if (j.contains("k")) c.k = get_list(j["k"], "k", false);
  if (j.contains("terms")) c.terms = get_positive_int(j["terms"], "terms");
  if (j.contains("K")) c.K = get_positive_int(j["K"], "K");
  if (j.contains("max_iter")) c.max_iter = get_positive_int(j["max_iter"], "max_iter");
  if (j.contains("depth")) c.depth = get_positive_int(j["depth"], "depth");
  if (j.contains("out")) {
    if (!j["out"].is_string() || j["out"].get<std::string>().empty()) config_error("out must be a nonempty path");
    c.out = j["out"].get<std::string>();
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) config_error("format must be csv or json");
    c.format = j["format"].get<std::string>();
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (!kCommands.count(c.command)) config_error("unknown command '" + c.command + "'");
  if (c.format != "csv" && c.format != "json") config_error("format must be csv or json");
  if (c.out.empty()) config_error("out must be a nonempty path");
  if (c.tol && !(*c.tol > 0)) config_error("tol must be positive");
  if (c.grid_step && !(*c.grid_step > 0)) config_error("grid_step must be positive");
  for (double r : c.radii)
    if (!(r > 0)) config_error("radii must be positive");
  for (auto v : {c.terms, c.K, c.max_iter, c.depth})
    if (v && *v <= 0) config_error("integer parameters must be positive");
  if (c.K && *c.K < 3) config_error("K must be at least 3");

  Kind kind;
  bool has_windows = false;
  if (c.inline_system) {
    const auto& s = *c.inline_system;
    kind = s.sigma.size() == 1 ? Kind::line : Kind::line_mc;
    has_windows = !s.windows.empty();
    try {
      MCSystem sys(s.a, s.sigma, s.m);
      if (s.s && (*s.s - sys.s()).cwiseAbs().maxCoeff() > 1e-12)
        config_error("s does not match the masses of sigma");
      (void)from_inline(s);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      config_error(std::string("inconsistent inline system: ") + e.what());
    }
  } else {
    if (!is_known_system(c.system)) config_error("unknown system '" + c.system + "'");
    const std::string n = canonical_system(c.system);
    kind = n == "ammann-beenker" ? Kind::plane : n == "ternary-padic" ? Kind::padic
                                                : n.rfind("silver-mc", 0) == 0 ? Kind::line_mc : Kind::line;
    has_windows = n != "point";
  }
  const std::string& cmd = c.command;
  if (kind == Kind::padic && cmd != "padic" && cmd != "measure")
    config_error("ternary-padic supports padic and measure only");
  if (cmd == "padic" && kind != Kind::padic) config_error("padic runs the ternary-padic system only");
  if (cmd == "fourier" && kind == Kind::plane) config_error("fourier is available for one-dimensional systems only");
  if (cmd == "weyl" && !has_windows) config_error("weyl needs windows");
}

RunReport run_experiment(const ExperimentConfig& c) {
  validate(c);
  const SystemData d = system_of(c);
  const fs::path dir(c.out);
  ensure_dir(dir);
  RunReport rep;
  if (c.command == "attractor") cmd_attractor(c, d, dir, rep);
  else if (c.command == "measure") cmd_measure(c, d, dir, rep);
  else if (c.command == "fourier") cmd_fourier(c, d, dir, rep);
  else if (c.command == "weyl") cmd_weyl(c, d, dir, rep);
  else cmd_padic(c, dir, rep);

  ojson s;
  s["command"] = c.command;
  s["system"] = d.name;
  s["pass"] = rep.pass;
  ojson v = ojson::object();
  for (const auto& [k, x] : rep.values) v[k] = x;
  s["values"] = v;
  ojson files = ojson::array();
  for (const auto& f : rep.files) files.push_back(fs::path(f).filename().string());
  s["files"] = files;
  s["summary"] = rep.lines;
  write_text(dir, d.name + "_" + c.command + "_summary.json", s.dump(1) + "\n", rep);
  return rep;
}

}  // namespace selfsim
