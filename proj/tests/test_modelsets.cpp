#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "selfsim/errors.hpp"
#include "selfsim/modelsets.hpp"
#include "selfsim/padic.hpp"

using namespace selfsim;

namespace {

const double kS2 = std::sqrt(2.0);
const double kAl = 1 + kS2;
const QuadRat qa(1, -1, 1);  // alpha*
const QuadRat qh(0, 1, 2);   // 1/sqrt2
const ExactIntervalSet kW(-qh, qh);
const ExactIntervalSet kW1(qh - QuadRat(1), qh);
const ExactIntervalSet kW2(-qh, qh - QuadRat(1));

std::vector<QuadInt> merged(const SubstitutionOrbit& o) {
  std::vector<QuadInt> all;
  for (const auto& p : o.points) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  return all;
}

double det4(std::array<std::array<double, 4>, 4> m) {
  double d = 1;
  for (int c = 0; c < 4; ++c) {
    int p = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    if (p != c) {
      std::swap(m[p], m[c]);
      d = -d;
    }
    d *= m[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return d;
}

}  // namespace

TEST_CASE("covolumes and densities") {
  auto s = CutProjectScheme::silver();
  CHECK(covolume(s) == doctest::Approx(2 * kS2).epsilon(1e-15));
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  CHECK(CutProjectScheme(RingKind::quadratic, 1, 1, id).covolume() == doctest::Approx(1));

  // Gram oracle: <v_k, v_l> = cos((k-l) pi/4) + cos(3 (k-l) pi/4)
  std::array<std::array<double, 4>, 4> g{};
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) g[k][l] = std::cos((k - l) * M_PI / 4) + std::cos(3 * (k - l) * M_PI / 4);
  auto ab = CutProjectScheme::ammann_beenker();
  CHECK(ab.covolume() == doctest::Approx(std::sqrt(det4(g))).epsilon(1e-12));
  CHECK(ab.covolume() == doctest::Approx(4).epsilon(1e-12));

  CHECK(theoretical_density(s, kW) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(theoretical_density(s, kW1) == doctest::Approx(1 / (2 * kS2)).epsilon(1e-15));
  CHECK(theoretical_density(s, ExactIntervalSet::point(QuadRat(1, 0, 3))) == 0);
  // Perron tile-frequency oracle: mean tile length (a^2 + 1)/(a + 1) = 2
  CHECK(theoretical_density(s, kW) == doctest::Approx((kAl + 1) / (kAl * kAl + 1)));

  const PolygonRegion oct(regular_octagon(1.0));
  const double R = 30;
  const auto pts = project_points(ab, oct, R);
  const double emp = static_cast<double>(pts.size()) / (M_PI * R * R);
  CHECK(emp == doctest::Approx(theoretical_density(ab, CompactSet(oct))).epsilon(0.03));
}

TEST_CASE("projected silver points") {
  auto s = CutProjectScheme::silver();
  const QuadInt al = kSilver, al1 = kSilver + QuadInt(1);
  CHECK(project_points(s, kW, 5) == std::vector<QuadInt>{-al1, -al, QuadInt(0), al, al1});
  CHECK(project_points(s, kW2, 5) == std::vector<QuadInt>{-al1, al});
  CHECK(project_points(s, ExactIntervalSet::point(QuadRat(1, 0, 3)), 5).empty());
  CHECK(project_points(s, to_double(kW), 5) == project_points(s, kW, 5));
  CHECK_THROWS_AS(project_points(s, kW, -1), ArgumentError);
  CHECK_THROWS_AS(project_points(CutProjectScheme::ammann_beenker(), kW, 5), ArgumentError);

  auto big = project_points(s, kW, 2000);
  CHECK(min_gap(big) == doctest::Approx(1));
  CHECK(max_gap(big) <= kAl + 1);
}

TEST_CASE("substitution words") {
  auto silver = SubstitutionRule::silver();
  auto o = substitution_orbit(silver, 'a', 'a', 3);
  CHECK(o.right_word.rfind("abaaabaabaabaaaba", 0) == 0);
  const std::string l = o.left_word;
  CHECK(std::string(l.rbegin(), l.rend()) == o.right_word);  // palindromic fixed point

  auto tern = SubstitutionRule::ternary();
  auto t = substitution_orbit(tern, 'c', 'a', 6);
  CHECK(t.right_word.rfind("ababcababcabccababcababc", 0) == 0);
  const std::string tail = "babcabccabccababcabccabcc";
  REQUIRE(t.left_word.size() >= tail.size());
  CHECK(t.left_word.substr(t.left_word.size() - tail.size()) == tail);

  auto z = substitution_orbit(silver, 'a', 'a', 0);
  CHECK(z.points[0] == std::vector<QuadInt>{-kSilver, QuadInt(0)});
  CHECK(z.points[1].empty());

  CHECK_THROWS_AS(substitution_orbit(silver, 'b', 'b', 2), ArgumentError);
  CHECK_THROWS_AS(substitution_orbit(silver, 'a', 'z', 2), ArgumentError);
  SubstitutionRule bad = silver;
  bad.lengths[1] = QuadInt(2);
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("substitution and projection agree") {
  auto s = CutProjectScheme::silver();
  for (double R : {50.0, 500.0}) {
    auto o = substitution_patch(SubstitutionRule::silver(), 'a', 'a', R);
    CHECK(crosscheck_modelset(merged(o), project_points(s, kW, R), R).equal);
    CHECK(crosscheck_modelset(o.points[0], project_points(s, kW1, R), R).equal);
    CHECK(crosscheck_modelset(o.points[1], project_points(s, kW2, R), R).equal);
    auto swapped = crosscheck_modelset(o.points[0], project_points(s, kW2, R), R);
    CHECK_FALSE(swapped.equal);
    CHECK_FALSE(swapped.only_first.empty());
  }
  auto t = substitution_patch(SubstitutionRule::ternary(), 'c', 'a', 200, Endpoint::right);
  for (int i = 1; i <= 3; ++i) {
    std::vector<QuadInt> w;
    for (auto x : ternary_model_set(i, 200, 7)) w.push_back(QuadInt(x));
    CHECK(crosscheck_modelset(t.points[static_cast<std::size_t>(i - 1)], w, 200).equal);
  }
}

TEST_CASE("inflation closure and union identity on patches") {
  auto s = CutProjectScheme::silver();
  const double R = 300;
  auto l1 = project_points(s, kW1, R), l2 = project_points(s, kW2, R);
  auto in = [](const ExactIntervalSet& w, const QuadInt& x) { return w.contains(QuadRat(star(x))); };
  const QuadInt al = kSilver;
  // j -> i through x -> alpha x + b with b* in the minimal translation sets
  for (const auto& x : l1) {
    CHECK(in(kW1, al * x));
    CHECK(in(kW1, al * x + al + QuadInt(1)));
    CHECK(in(kW2, al * x + al));
  }
  for (const auto& x : l2) CHECK(in(kW1, al * x));
  std::set<QuadInt> img1, img2;
  for (const auto& x : l1) {
    img1.insert(al * x);
    img1.insert(al * x + al + QuadInt(1));
    img2.insert(al * x + al);
  }
  for (const auto& x : l2) img1.insert(al * x);
  const double core = R * kAl * 0.9 - 5;
  auto core_of = [&](const std::set<QuadInt>& v) {
    std::vector<QuadInt> out;
    for (const auto& x : v)
      if (std::abs(embed(x)) <= core) out.push_back(x);
    return out;
  };
  CHECK(crosscheck_modelset(core_of(img1), project_points(s, kW1, core), core).equal);
  CHECK(crosscheck_modelset(core_of(img2), project_points(s, kW2, core), core).equal);
}

TEST_CASE("maximal translation regions") {
  CHECK(maximal_translation_region(kW1, kW1, qa) == ExactIntervalSet(QuadRat(0), QuadRat(1) + qa));
  CHECK(maximal_translation_region(kW2, kW1, qa) == ExactIntervalSet::point(qa));
  CHECK(maximal_translation_region(kW1, kW2, qa) == ExactIntervalSet(qa, -qa));
  // the literal erosion for (W2, W2)
  CHECK(maximal_translation_region(kW2, kW2, qa) == ExactIntervalSet(qa * QuadRat(2), QuadRat(-2, 1, 1)));
  CHECK(maximal_translation_region(kW2, kW, qa).empty());

  auto oct = regular_octagon(1.0);
  auto f = maximal_translation_region(oct, oct, 1 - kS2);
  auto want = scaled(oct, 2 - kS2);
  REQUIRE(f.vertices().size() == 8);
  double err = 0;
  for (const auto& v : want.vertices()) {
    double best = INFINITY;
    for (const auto& u : f.vertices()) best = std::min(best, (u - v).norm());
    err = std::max(err, best);
  }
  CHECK(err < 1e-9);

  // sampled defining inclusion
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2), t(0, 1);
  for (int n = 0; n < 100; ++n) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    IntervalSet wi(std::min(a, b), std::max(a, b)), wj(std::min(c, d), std::max(c, d));
    const double q = 0.9 * u(rng) / 2;
    auto reg = maximal_translation_region(wi, wj, q);
    for (const auto& iv : reg.intervals())
      for (int k = 0; k < 20; ++k) {
        const double bb = iv.lo + t(rng) * (iv.hi - iv.lo);
        const double w = wj.min() + t(rng) * (wj.max() - wj.min());
        CHECK(q * w + bb >= wi.min() - 1e-12);
        CHECK(q * w + bb <= wi.max() + 1e-12);
      }
  }
}

TEST_CASE("Weyl averages") {
  auto s = CutProjectScheme::silver();
  const double R = 6000;
  auto p = make_patch(project_points(s, kW, R), R);
  auto rows = weyl_count(p, kS2, s, {500, 5000}, {0});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].limit == doctest::Approx(0.5));
  CHECK(rows[1].abs_error < rows[0].abs_error);
  CHECK(rows[1].abs_error < 1e-3);

  // indicator of W1 on the full set gives the W1 density
  auto ind = weyl_average(p, [](double y) { return y >= kS2 / 2 - 1 && y <= kS2 / 2 ? 1.0 : 0.0; },
                          1 / (2 * kS2), {5000}, {0, 500});
  for (const auto& r : ind) CHECK(r.abs_error < 2e-3);
  CHECK(std::abs(ind[0].average - ind[1].average) < 10.0 / 5000);

  CHECK_THROWS_AS(weyl_count(p, kS2, s, {5000}, {1500}), ArgumentError);

  std::ostringstream os;
  write_weyl_csv(os, rows);
  CHECK(os.str().rfind("radius,center,average,limit,abs_error\n500,0,", 0) == 0);
}

TEST_CASE("point CSV") {
  auto o = substitution_orbit(SubstitutionRule::silver(), 'a', 'a', 1);
  std::ostringstream os;
  write_points_csv(os, o.points);
  const std::string csv = os.str();
  CHECK(csv.rfind("x,a,b,type\n", 0) == 0);
  CHECK(csv.find("\n0,0,0,1\n") != std::string::npos);
  std::ostringstream o2;
  write_points_csv(o2, std::vector<CycloInt>{CycloInt(1, 0, 0, 0)});
  CHECK(o2.str() == "x,y,c0,c1,c2,c3,type\n1,0,1,0,0,0,1\n");
}
