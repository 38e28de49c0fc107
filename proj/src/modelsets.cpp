#include "selfsim/modelsets.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/LU>

#include "selfsim/errors.hpp"

namespace selfsim {

CutProjectScheme::CutProjectScheme(RingKind kind, int physical_dim, int internal_dim, Eigen::MatrixXd basis)
    : kind_(kind), pdim_(physical_dim), idim_(internal_dim), basis_(std::move(basis)) {
  if (pdim_ < 1 || idim_ < 0 || basis_.cols() != pdim_ + idim_ || basis_.rows() < 1)
    throw ArgumentError("basis rows must be (x, x*) of the stated dimensions");
  if (basis_.rows() == basis_.cols()) {
    covol_ = std::abs(basis_.determinant());
  } else {
    covol_ = std::sqrt(std::abs((basis_ * basis_.transpose()).determinant()));
  }
  if (!(covol_ > 0)) throw ArgumentError("lattice basis is degenerate");
}

CutProjectScheme CutProjectScheme::silver() {
  Eigen::MatrixXd b(2, 2);
  b << 1, 1, kSqrt2, -kSqrt2;
  return {RingKind::quadratic, 1, 1, b};
}

CutProjectScheme CutProjectScheme::ammann_beenker() {
  Eigen::MatrixXd b(4, 4);
  for (int k = 0; k < 4; ++k) {
    const CycloInt u = CycloInt::unit(k);
    const Point2 p = embed(u), q = embed_star(u);
    b.row(k) << p.x(), p.y(), q.x(), q.y();
  }
  return {RingKind::cyclotomic, 2, 2, b};
}

double covolume(const CutProjectScheme& s) { return s.covolume(); }

double theoretical_density(const CutProjectScheme& s, const CompactSet& window) {
  if (const auto* i = std::get_if<IntervalSet>(&window)) {
    if (s.internal_dim() != 1) throw ArgumentError("window dimension does not match the scheme");
    return i->measure() / s.covolume();
  }
  if (s.internal_dim() != 2) throw ArgumentError("window dimension does not match the scheme");
  return std::get<PolygonRegion>(window).area() / s.covolume();
}

double theoretical_density(const CutProjectScheme& s, const ExactIntervalSet& window) {
  return theoretical_density(s, CompactSet(to_double(window)));
}

namespace {

void require_quadratic(const CutProjectScheme& s) {
  if (s.kind() != RingKind::quadratic) throw ArgumentError("interval windows need the Z[sqrt2] scheme");
}

double star_reach(double lo, double hi) { return std::max(std::abs(lo), std::abs(hi)) * (1 + 1e-12) + 1e-12; }

}  // namespace

std::vector<QuadInt> project_points(const CutProjectScheme& s, const ExactIntervalSet& window, double radius) {
  require_quadratic(s);
  if (!(radius > 0)) throw ArgumentError("radius must be positive");
  if (window.empty()) return {};
  const double reach = star_reach(window.min().to_double(), window.max().to_double());
  std::vector<QuadInt> out;
  for (const auto& x : enumerate_quad_in_box(radius, reach))
    if (std::abs(embed(x)) <= radius && window.contains(QuadRat(star(x)))) out.push_back(x);
  return out;
}

std::vector<QuadInt> project_points(const CutProjectScheme& s, const IntervalSet& window, double radius) {
  require_quadratic(s);
  if (!(radius > 0)) throw ArgumentError("radius must be positive");
  if (window.empty()) return {};
  std::vector<QuadInt> out;
  for (const auto& x : enumerate_quad_in_box(radius, star_reach(window.min(), window.max())))
    if (std::abs(embed(x)) <= radius && window.contains(embed_star(x))) out.push_back(x);
  return out;
}

std::vector<CycloInt> project_points(const CutProjectScheme& s, const PolygonRegion& window, double radius) {
  if (s.kind() != RingKind::cyclotomic) throw ArgumentError("polygon windows need the Z[xi] scheme");
  if (!(radius > 0)) throw ArgumentError("radius must be positive");
  if (window.empty()) return {};
  double reach = 0;
  for (const auto& p : window.parts())
    for (const auto& v : p.vertices()) reach = std::max(reach, v.cwiseAbs().maxCoeff());
  std::vector<CycloInt> out;
  for (const auto& x : enumerate_cyclo_in_box(radius, reach * (1 + 1e-12) + 1e-12))
    if (embed(x).norm() <= radius && window.contains(embed_star(x))) out.push_back(x);
  return out;
}

SubstitutionRule SubstitutionRule::silver() { return {{"aba", "a"}, {kSilver, QuadInt(1)}, kSilver}; }

SubstitutionRule SubstitutionRule::ternary() {
  return {{"ab", "abc", "abcc"}, {QuadInt(1), QuadInt(2), QuadInt(3)}, QuadInt(3)};
}

void SubstitutionRule::validate() const {
  if (images.empty() || lengths.size() != images.size()) throw ArgumentError("one image and one length per letter");
  for (std::size_t t = 0; t < images.size(); ++t) {
    if (images[t].empty()) throw ArgumentError("empty substitution image");
    if (lengths[t].sign() <= 0) throw ArgumentError("tile lengths must be positive");
    QuadInt sum{0};
    for (char c : images[t]) {
      const auto u = static_cast<std::size_t>(c - 'a');
      if (c < 'a' || u >= images.size()) throw ArgumentError(std::string("unknown letter '") + c + "'");
      sum += lengths[u];
    }
    if (!(inflation * lengths[t] == sum))
      throw ArgumentError(std::string("inflation equation fails for letter '") + static_cast<char>('a' + t) + "'");
  }
}

namespace {

std::size_t letter(const SubstitutionRule& r, char c) {
  const auto u = static_cast<std::size_t>(c - 'a');
  if (c < 'a' || u >= r.alphabet()) throw ArgumentError(std::string("unknown letter '") + c + "'");
  return u;
}

std::string substitute(const SubstitutionRule& r, const std::string& w) {
  std::string out;
  for (char c : w) out += r.images[letter(r, c)];
  return out;
}

void check_seed(const SubstitutionRule& r, char left, char right) {
  r.validate();
  const std::string& li = r.images[letter(r, left)];
  const std::string& ri = r.images[letter(r, right)];
  if (ri.front() != right || li.back() != left)
    throw ArgumentError(std::string("seed ") + left + "|" + right + " does not extend under substitution");
}

SubstitutionOrbit coordinates(const SubstitutionRule& r, std::string lw, std::string rw, Endpoint e) {
  SubstitutionOrbit o;
  o.points.resize(r.alphabet());
  QuadInt pos{0};
  for (char c : rw) {
    const auto t = letter(r, c);
    const QuadInt next = pos + r.lengths[t];
    o.points[t].push_back(e == Endpoint::left ? pos : next);
    pos = next;
  }
  pos = QuadInt(0);
  for (auto it = lw.rbegin(); it != lw.rend(); ++it) {
    const auto t = letter(r, *it);
    const QuadInt prev = pos - r.lengths[t];
    o.points[t].push_back(e == Endpoint::left ? prev : pos);
    pos = prev;
  }
  for (auto& p : o.points) std::sort(p.begin(), p.end());
  o.left_word = std::move(lw);
  o.right_word = std::move(rw);
  return o;
}

QuadInt word_length(const SubstitutionRule& r, const std::string& w) {
  QuadInt s{0};
  for (char c : w) s += r.lengths[letter(r, c)];
  return s;
}

}  // namespace

SubstitutionOrbit substitution_orbit(const SubstitutionRule& rule, char left, char right, int generations,
                                     Endpoint endpoint) {
  if (generations < 0) throw ArgumentError("generations must be nonnegative");
  check_seed(rule, left, right);
  std::string lw(1, left), rw(1, right);
  for (int g = 0; g < generations; ++g) {
    lw = substitute(rule, lw);
    rw = substitute(rule, rw);
    if (lw.size() + rw.size() > 50'000'000) throw ResourceError("substitution word too long");
  }
  return coordinates(rule, std::move(lw), std::move(rw), endpoint);
}

SubstitutionOrbit substitution_patch(const SubstitutionRule& rule, char left, char right, double radius,
                                     Endpoint endpoint) {
  if (!(radius >= 0)) throw ArgumentError("radius must be nonnegative");
  check_seed(rule, left, right);
  double longest = 0;
  for (const auto& l : rule.lengths) longest = std::max(longest, embed(l));
  std::string lw(1, left), rw(1, right);
  while (embed(word_length(rule, lw)) < radius + longest || embed(word_length(rule, rw)) < radius + longest) {
    lw = substitute(rule, lw);
    rw = substitute(rule, rw);
    if (lw.size() + rw.size() > 50'000'000) throw ResourceError("substitution word too long");
  }
  auto o = coordinates(rule, std::move(lw), std::move(rw), endpoint);
  for (auto& p : o.points)
    p.erase(std::remove_if(p.begin(), p.end(), [&](const QuadInt& x) { return std::abs(embed(x)) > radius; }),
            p.end());
  return o;
}

CrosscheckReport crosscheck_modelset(const std::vector<QuadInt>& first, const std::vector<QuadInt>& second,
                                     double radius) {
  auto clip = [&](const std::vector<QuadInt>& v) {
    std::vector<QuadInt> out;
    for (const auto& x : v)
      if (std::abs(embed(x)) <= radius) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  const auto a = clip(first), b = clip(second);
  CrosscheckReport r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.only_first));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(r.only_second));
  r.compared = std::max(a.size(), b.size());
  r.equal = r.only_first.empty() && r.only_second.empty();
  return r;
}

IntervalSet maximal_translation_region(const IntervalSet& wi, const IntervalSet& wj, double a) {
  if (wi.empty() || wj.empty()) throw ArgumentError("windows must be nonempty");
  return erosion(wi, apply_affine(AffineMap1D{a, 0}, wj));
}

ExactIntervalSet maximal_translation_region(const ExactIntervalSet& wi, const ExactIntervalSet& wj,
                                            const QuadRat& a) {
  if (wi.empty() || wj.empty()) throw ArgumentError("windows must be nonempty");
  return erosion(wi, apply_affine(ExactAffineMap1D{a, QuadRat(0)}, wj));
}

ConvexPolygon maximal_translation_region(const ConvexPolygon& wi, const ConvexPolygon& wj, double a) {
  if (wi.empty() || wj.empty()) throw ArgumentError("windows must be nonempty");
  return erosion(wi, scaled(wj, a));
}

Patch make_patch(const std::vector<QuadInt>& pts, double radius) {
  std::vector<QuadInt> v = pts;
  std::sort(v.begin(), v.end());
  Patch p;
  p.radius = radius;
  for (const auto& x : v) {
    p.x.push_back(embed(x));
    p.star.push_back(embed_star(x));
  }
  return p;
}

std::vector<WeylRow> weyl_average(const Patch& p, const std::function<double(double)>& f, double limit,
                                  const std::vector<double>& radii, const std::vector<double>& centers) {
  std::vector<WeylRow> rows;
  for (double c : centers)
    for (double r : radii) {
      if (!(r > 0)) throw ArgumentError("radii must be positive");
      if (std::abs(c) + r > p.radius * (1 + 1e-12))
        throw ArgumentError("ball of radius " + format_double(r) + " at " + format_double(c) +
                            " leaves the enumerated patch");
      const auto lo = std::lower_bound(p.x.begin(), p.x.end(), c - r);
      const auto hi = std::upper_bound(p.x.begin(), p.x.end(), c + r);
      long double s = 0;
      for (auto it = lo; it != hi; ++it) s += f(p.star[static_cast<std::size_t>(it - p.x.begin())]);
      const double avg = static_cast<double>(s / (2 * static_cast<long double>(r)));
      rows.push_back({r, c, avg, limit, std::abs(avg - limit)});
    }
  return rows;
}

std::vector<WeylRow> weyl_average(const Patch& p, const GridDensity1D& g, const CutProjectScheme& s,
                                  const std::vector<double>& radii, const std::vector<double>& centers) {
  return weyl_average(p, [&](double y) { return g(y); }, g.mass() / s.covolume(), radii, centers);
}

std::vector<WeylRow> weyl_count(const Patch& p, double window_measure, const CutProjectScheme& s,
                                const std::vector<double>& radii, const std::vector<double>& centers) {
  return weyl_average(p, [](double) { return 1.0; }, window_measure / s.covolume(), radii, centers);
}

double min_gap(const std::vector<QuadInt>& pts) {
  if (pts.size() < 2) throw ArgumentError("need two points");
  double g = INFINITY;
  for (std::size_t k = 1; k < pts.size(); ++k) g = std::min(g, embed(pts[k] - pts[k - 1]));
  return g;
}

double max_gap(const std::vector<QuadInt>& pts) {
  if (pts.size() < 2) throw ArgumentError("need two points");
  double g = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) g = std::max(g, embed(pts[k] - pts[k - 1]));
  return g;
}

void write_points_csv(std::ostream& os, const std::vector<std::vector<QuadInt>>& by_type) {
  std::vector<std::pair<QuadInt, std::size_t>> all;
  for (std::size_t t = 0; t < by_type.size(); ++t)
    for (const auto& x : by_type[t]) all.push_back({x, t + 1});
  std::sort(all.begin(), all.end(), [](const auto& u, const auto& v) {
    return u.first < v.first || (u.first == v.first && u.second < v.second);
  });
  os << "x,a,b,type\n";
  for (const auto& [x, t] : all) os << format_double(embed(x)) << ',' << x.a() << ',' << x.b() << ',' << t << '\n';
}

void write_points_csv(std::ostream& os, const std::vector<CycloInt>& pts) {
  os << "x,y,c0,c1,c2,c3,type\n";
  for (const auto& p : pts) {
    const Point2 e = embed(p);
    os << format_double(e.x()) << ',' << format_double(e.y()) << ',' << p[0] << ',' << p[1] << ',' << p[2] << ','
       << p[3] << ",1\n";
  }
}

void write_weyl_csv(std::ostream& os, const std::vector<WeylRow>& rows) {
  os << "radius,center,average,limit,abs_error\n";
  for (const auto& r : rows)
    os << format_double(r.radius) << ',' << format_double(r.center) << ',' << format_double(r.average) << ','
       << format_double(r.limit) << ',' << format_double(r.abs_error) << '\n';
}

}  // namespace selfsim
