#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "selfsim/errors.hpp"
#include "selfsim/measures.hpp"

using namespace selfsim;

namespace {

const double kS2 = std::sqrt(2.0);
const double kA = 1 - kS2;  // alpha*
const double kW = 1 / kS2;

FiniteFamily silver_min() {
  return {DiscreteMeasure({{kA, 1.0 / 3}, {0, 1.0 / 3}, {-kA, 1.0 / 3}})};
}
UniformFamily silver_max() { return {IntervalSet(kA, -kA), 1.0}; }

std::int64_t node(const GridDensity1D& g, std::size_t k) {
  return std::llround(g.x(k) / g.step);
}
double at_node(const GridDensity1D& g, std::int64_t i) {
  const std::int64_t first = std::llround(g.origin / g.step);
  const std::int64_t k = i - first;
  return (k < 0 || k >= static_cast<std::int64_t>(g.size())) ? 0.0 : g.weights[static_cast<std::size_t>(k)];
}
double mirror_deviation(const GridDensity1D& g) {
  double d = 0;
  for (std::size_t k = 0; k < g.size(); ++k) d = std::max(d, std::abs(g.weights[k] - at_node(g, -node(g, k))));
  return d;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> x(lo, hi), w(0.05, 1.0);
  std::uniform_int_distribution<int> n(1, 12);
  std::vector<Atom> atoms(static_cast<std::size_t>(n(rng)));
  double s = 0;
  for (auto& a : atoms) {
    a = {x(rng), w(rng)};
    s += a.w;
  }
  for (auto& a : atoms) a.w /= s;
  return DiscreteMeasure(std::move(atoms));
}

// Integral of a random 1-Lipschitz piecewise-linear function.
double lip_integral(const std::vector<double>& knots, const std::vector<double>& vals,
                    const DiscreteMeasure& m) {
  double s = 0;
  for (const auto& a : m.atoms()) {
    auto it = std::upper_bound(knots.begin(), knots.end(), a.x);
    std::size_t j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - knots.begin(), 1,
                                             static_cast<std::ptrdiff_t>(knots.size()) - 1));
    const double t = (a.x - knots[j - 1]) / (knots[j] - knots[j - 1]);
    s += a.w * (vals[j - 1] + t * (vals[j] - vals[j - 1]));
  }
  return s;
}

double sampled_lip_sup(std::mt19937_64& rng, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       double lo, double hi, int trials) {
  std::uniform_real_distribution<double> u(0, 1);
  double best = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(u(rng) * 20);
    std::vector<double> knots{lo};
    for (int i = 0; i < n; ++i) knots.push_back(lo + (hi - lo) * u(rng));
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> vals{0};
    for (std::size_t i = 1; i < knots.size(); ++i)
      vals.push_back(vals.back() + (u(rng) < 0.5 ? -1 : 1) * (knots[i] - knots[i - 1]));
    best = std::max(best, std::abs(lip_integral(knots, vals, mu) - lip_integral(knots, vals, nu)));
  }
  return best;
}

}  // namespace

TEST_CASE("hutchinson distance examples") {
  CHECK(hutchinson_distance(DiscreteMeasure::dirac(0), DiscreteMeasure::dirac(1)) == doctest::Approx(1).epsilon(1e-15));
  auto mu = DiscreteMeasure({{0.1, 0.3}, {0.7, 0.7}});
  CHECK(hutchinson_distance(mu, mu) == 0);
  auto half = DiscreteMeasure({{0, 0.5}, {2, 0.5}});
  CHECK(hutchinson_distance(half, DiscreteMeasure::dirac(1)) == doctest::Approx(1).epsilon(1e-15));
  CHECK_THROWS_AS(hutchinson_distance(half, DiscreteMeasure::dirac(1, 2)), ArgumentError);

  // witness search: |x - 1| is a slope +-1 function, so random search finds ~1
  std::mt19937_64 rng(7);
  const double lower = sampled_lip_sup(rng, half, DiscreteMeasure::dirac(1), -1, 3, 4000);
  CHECK(lower <= 1 + 1e-12);
  CHECK(lower > 0.9);
}

TEST_CASE("hutchinson distance dominates every sampled Lipschitz witness") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    auto mu = random_measure(rng, -1, 1), nu = random_measure(rng, -1, 1);
    const double d = hutchinson_distance(mu, nu);
    CHECK(sampled_lip_sup(rng, mu, nu, -1, 1, 200) <= d + 1e-12);
    CHECK(d == doctest::Approx(hutchinson_distance(nu, mu)).epsilon(1e-12));
  }
}

TEST_CASE("discrete measure merges close atoms") {
  DiscreteMeasure m({{1.0, 0.25}, {1.0 + 1e-13, 0.25}, {0.0, 0.5}});
  CHECK(m.size() == 2);
  CHECK(m.total_mass() == doctest::Approx(1));
  CHECK_THROWS_AS(DiscreteMeasure({{0.0, -1.0}}), ArgumentError);
}

TEST_CASE("pushforward examples") {
  auto m = pushforward(AffineMap1D{kA, 0.25}, DiscreteMeasure::dirac(2.0));
  REQUIRE(m.size() == 1);
  CHECK(m.atoms()[0].x == doctest::Approx(kA * 2 + 0.25));
  CHECK(m.atoms()[0].w == 1);

  GridDensity1D u{0, 0.01, std::vector<double>(101, 1.0)};
  auto h = pushforward(AffineMap1D{0.5, 0}, u);
  CHECK(h.x(h.size() - 1) == doctest::Approx(0.5));
  CHECK(h(0.25) == doctest::Approx(2));
  CHECK(h.mass() == doctest::Approx(u.mass()).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-2, 2), w(0, 3), s(0.001, 0.1);
  std::uniform_int_distribution<int> n(1, 400);
  for (int t = 0; t < 100; ++t) {
    GridDensity1D g{x(rng), s(rng), {}};
    g.weights.resize(static_cast<std::size_t>(n(rng)));
    for (auto& v : g.weights) v = w(rng);
    double a = x(rng);
    if (std::abs(a) < 1e-3) a = 0.5;
    auto p = pushforward(AffineMap1D{a, x(rng)}, g);
    CHECK(std::abs(p.mass() - g.mass()) <= 1e-9);
  }
}

TEST_CASE("average step examples") {
  // delta_0 family is neutral: only the pushforward remains
  auto m = DiscreteMeasure({{0.3, 0.5}, {-0.2, 0.5}});
  auto r = average_step(PointMassFamily{0, 1}, 0.5, m);
  REQUIRE(r.size() == 2);
  CHECK(r.atoms()[0].x == doctest::Approx(-0.1));
  CHECK(r.atoms()[1].x == doctest::Approx(0.15));

  auto three = average_step(silver_min(), kA, DiscreteMeasure::dirac(0));
  REQUIRE(three.size() == 3);
  CHECK(three.atoms()[0].x == doctest::Approx(kA));
  CHECK(three.atoms()[1].x == 0);
  CHECK(three.atoms()[2].x == doctest::Approx(-kA));
  for (const auto& a : three.atoms()) CHECK(a.w == doctest::Approx(1.0 / 3));

  CHECK_THROWS_AS(average_step(silver_max(), kA, m), ArgumentError);

  const double h = 1e-3;
  auto g = sample_family(silver_max(), h);
  CHECK(g.mass() == doctest::Approx(1).epsilon(1e-12));
  auto next = average_step(silver_max(), kA, g);
  CHECK(std::abs(next.mass() - 1) < 1e-9);
}

TEST_CASE("invariant atoms of the minimal family") {
  auto nu = silver_min().atoms;
  auto d1 = solve_invariant_atoms(nu, kA, 1);
  // oracle: t0 + a t1 over the 3x3 grid of atom locations
  std::vector<double> want;
  for (double t0 : {kA, 0.0, -kA})
    for (double t1 : {kA, 0.0, -kA}) want.push_back(t0 + kA * t1);
  std::sort(want.begin(), want.end());
  REQUIRE(d1.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(d1.atoms()[k].x == doctest::Approx(want[k]).epsilon(1e-15));
    CHECK(d1.atoms()[k].w == doctest::Approx(1.0 / 9).epsilon(1e-15));
  }
  DiscreteMeasure prev = d1;
  for (int depth = 2; depth <= 9; ++depth) {
    auto d = solve_invariant_atoms(nu, kA, depth);
    CHECK(d.total_mass() == doctest::Approx(1).epsilon(1e-13));
    for (const auto& a : d.atoms()) CHECK(std::abs(a.x) <= kW + 1e-12);
    // support growth law: |x| <= |a*| sum_{k<=depth} |a|^k
    double reach = 0;
    for (int k = 0; k <= depth; ++k) reach += std::abs(kA) * std::pow(std::abs(kA), k);
    for (const auto& a : d.atoms()) CHECK(std::abs(a.x) <= reach + 1e-12);
    CHECK(hutchinson_distance(prev, d) <= std::pow(std::abs(kA), depth) * 2 * kW + 1e-12);
    prev = d;
  }
  CHECK_THROWS_AS(solve_invariant_atoms(nu, kA, 12, 1000), ResourceError);
  CHECK_THROWS_AS(solve_invariant_atoms(nu, kA, 0), ArgumentError);
}

TEST_CASE("averaging operator contracts the Hutchinson distance") {
  std::mt19937_64 rng(2024);
  const double r = kS2 - 1;
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    auto mu = random_measure(rng, -kW, kW), nu = random_measure(rng, -kW, kW);
    const double before = hutchinson_distance(mu, nu);
    const double after = hutchinson_distance(average_step(silver_min(), kA, mu), average_step(silver_min(), kA, nu));
    if (after > r * before + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("maximal density: mass, support, symmetry, residual") {
  SolveOptions o;
  o.step = 1e-4;
  o.tol = 1e-8;
  auto res = solve_density(silver_max(), kA, o);
  const auto& g = res.density;
  CHECK(std::abs(g.mass() - 1) <= 1e-6);
  CHECK(g.x(0) >= -kW - g.step);
  CHECK(g.x(g.size() - 1) <= kW + g.step);
  CHECK(mirror_deviation(g) <= 1e-9);
  CHECK(fixed_point_residual(silver_max(), kA, g) <= 2 * o.tol);
  for (double v : g.weights) CHECK(v >= 0);
  CHECK(res.iterations <= o.max_iter);
  CHECK(res.analytic_iterations > 0);

  // seed independence: start from the uniform density on W
  GridDensity1D uni;
  uni.step = o.step;
  const auto n = static_cast<std::int64_t>(std::floor(kW / o.step));
  uni.origin = -n * o.step;
  uni.weights.assign(static_cast<std::size_t>(2 * n + 1), 1.0 / (2 * kW));
  auto res2 = solve_density(silver_max(), kA, o, &uni);
  CHECK(l1_distance(g, res2.density) < 4 * o.tol);

  // grid transform against the sinc product
  for (double k : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0}) {
    CHECK(std::abs(grid_fourier(g, k) - fourier_hat(silver_max(), kA, k, 40)) < 1e-4);
  }
}

TEST_CASE("maximal density agrees with a brute-force iteration") {
  // Independent discretization: direct sums over kernel nodes, midpoint
  // kernel weights, interpolation written out by hand.
  const double h = 4e-4;
  SolveOptions o;
  o.step = h;
  o.tol = 1e-10;
  auto g = solve_density(silver_max(), kA, o).density;
  CHECK(mirror_deviation(g) <= 1e-9);

  const auto N = static_cast<std::int64_t>(std::ceil(kW / h)) + 2;
  const auto R = static_cast<std::int64_t>(std::floor(-kA / h));
  std::vector<double> ker(static_cast<std::size_t>(2 * R + 1), h / (-2 * kA));
  double extra = (1 - h / (-2 * kA) * static_cast<double>(2 * R + 1)) / 2;
  ker.front() += extra;
  ker.back() += extra;
  auto idx = [&](std::int64_t i) { return static_cast<std::size_t>(i + N); };
  std::vector<double> cur(static_cast<std::size_t>(2 * N + 1), 0.0);
  for (std::int64_t i = -R; i <= R; ++i) cur[idx(i)] = ker[static_cast<std::size_t>(i + R)] / h;
  const double alpha = 1 / std::abs(kA);
  for (int it = 0; it < 40; ++it) {
    std::vector<double> sc(cur.size(), 0.0);
    for (std::int64_t i = -N; i <= N; ++i) {
      const double t = static_cast<double>(i) / kA;
      const auto j = static_cast<std::int64_t>(std::floor(t));
      const double f = t - static_cast<double>(j);
      auto get = [&](std::int64_t q) { return (q < -N || q > N) ? 0.0 : cur[idx(q)]; };
      sc[idx(i)] = alpha * ((1 - f) * get(j) + f * get(j + 1));
    }
    std::vector<double> nx(cur.size(), 0.0);
    for (std::int64_t i = -N; i <= N; ++i)
      for (std::int64_t d = -R; d <= R; ++d) {
        const std::int64_t q = i - d;
        if (q >= -N && q <= N) nx[idx(i)] += ker[static_cast<std::size_t>(d + R)] * sc[idx(q)];
      }
    double m = 0;
    for (double v : nx) m += v * h;
    for (double& v : nx) v /= m;
    cur = std::move(nx);
  }
  double sym = 0, diff = 0;
  for (std::int64_t i = -N; i <= N; ++i) {
    sym = std::max(sym, std::abs(cur[idx(i)] - cur[idx(-i)]));
    diff += std::abs(cur[idx(i)] - at_node(g, i)) * h;
  }
  CHECK(sym <= 1e-9);
  // the two discretizations differ only at the kernel ends, an O(h) effect
  CHECK(diff < 50 * h);
}

TEST_CASE("density solve from a grid kernel and error paths") {
  SolveOptions o;
  o.step = 1e-3;
  auto h = sample_family(silver_max(), o.step);
  auto a = solve_density(h, kA, o).density;
  auto b = solve_density(silver_max(), kA, o).density;
  CHECK(l1_distance(a, b) < 1e-9);

  CHECK_THROWS_AS(solve_density(silver_min(), kA, o), ArgumentError);
  CHECK_THROWS_AS(solve_density(silver_max(), 1.5, o), ArgumentError);
  SolveOptions bad = o;
  bad.max_iter = 2;
  bad.tol = 1e-14;
  CHECK_THROWS_AS(solve_density(silver_max(), kA, bad), NonConvergenceError);
  bad = o;
  bad.step = -1;
  CHECK_THROWS_AS(solve_density(silver_max(), kA, bad), ArgumentError);
}

TEST_CASE("grid iterates obey the support growth law") {
  const double h = 1e-3;
  auto g = sample_family(silver_max(), h);
  double reach = -kA;
  for (int l = 1; l <= 8; ++l) {
    g = average_step(silver_max(), kA, g);
    reach += -kA * std::pow(-kA, l);
    for (std::size_t k = 0; k < g.size(); ++k)
      if (g.weights[k] != 0) CHECK(std::abs(g.x(k)) <= reach + (l + 1) * h);
  }
}

TEST_CASE("fourier products") {
  CHECK(std::abs(fourier_hat(silver_max(), kA, 0, 40) - 1.0) < 1e-15);
  CHECK(std::abs(fourier_hat(silver_min(), kA, 0, 40) - 1.0) < 1e-15);
  CHECK(std::abs(fourier_hat(silver_max(), kA, 1, 40) - fourier_hat(silver_max(), kA, 1, 60)) < 1e-10);
  const double tau = 2 * M_PI;
  for (double k = -5; k <= 5; k += 0.25) {
    auto mx = fourier_hat(silver_max(), kA, k, 40);
    auto mn = fourier_hat(silver_min(), kA, k, 40);
    CHECK(std::abs(mx.imag()) < 1e-12);
    CHECK(std::abs(mn.imag()) < 1e-12);
    CHECK(std::abs(mx) <= 1 + 1e-12);
    double sinc = 1, cosp = 1, q = k;
    for (int l = 0; l < 40; ++l) {
      const double z = tau * kA * q;
      sinc *= z == 0 ? 1 : std::sin(z) / z;
      cosp *= (1 + 2 * std::cos(tau * kA * q)) / 3;
      q *= kA;
    }
    CHECK(mx.real() == doctest::Approx(sinc).epsilon(1e-12));
    CHECK(mn.real() == doctest::Approx(cosp).epsilon(1e-12));
  }
  auto p = fourier_hat(PointMassFamily{0.25, 1}, 0.5, 1, 30);
  CHECK(std::abs(p) == doctest::Approx(1));
  CHECK_THROWS_AS(fourier_hat(silver_max(), kA, 1, 0), ArgumentError);
}

TEST_CASE("serialization round trip") {
  GridDensity1D g{-0.5, 0.25, {0.0, 1.0 / 3, 2.0, 1e-300}};
  auto back = grid1d_from_json(to_json(g));
  CHECK(back.origin == g.origin);
  CHECK(back.step == g.step);
  CHECK(back.weights == g.weights);
  std::ostringstream os;
  write_csv(os, g);
  CHECK(os.str().rfind("x,density\n-0.5,0\n", 0) == 0);
  CHECK_THROWS_AS(grid1d_from_json("{not json"), ArgumentError);
}

TEST_CASE("planar density for the octagonal family") {
  const double al = 1 + kS2;
  ConvexPolygon w = regular_octagon(1.0);
  UniformFamily2D f{PolygonRegion(scaled(w, 2 - kS2)), 1.0};
  SolveOptions o;
  o.step = al / 127;
  o.tol = 1e-8;
  auto r = solve_density_2d(f, kA, o);
  const auto& g = r.density;
  CHECK(std::abs(g.mass() - 1) < 1e-4);
  double mx = 0, eight = 0, d4 = 0, outside = 0;
  const double c = std::cos(M_PI / 4);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) mx = std::max(mx, g.at(ix, iy));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point2 p = g.x(ix, iy);
      const double v = g.at(ix, iy);
      CHECK(v >= 0);
      eight = std::max(eight, std::abs(v - g(Point2(c * (p.x() - p.y()), c * (p.x() + p.y())))));
      d4 = std::max(d4, std::abs(v - g(Point2(-p.y(), p.x()))));
      if (v > 0) outside = std::max(outside, w.distance(p));
    }
  CHECK(d4 < 1e-12);
  CHECK(eight / mx < 1e-3);
  CHECK(outside <= o.step * kS2);
}
