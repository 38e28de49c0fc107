#include "selfsim/compactsets.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace selfsim {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

constexpr std::size_t kMaxParts = 4096;

// Clip a convex polygon (ccw vertex list) to n . x <= c.
std::vector<Point2> clip(const std::vector<Point2>& poly, const Point2& n, double c) {
  std::vector<Point2> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % m];
    const double fp = n.dot(p) - c;
    const double fq = n.dot(q) - c;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) out.push_back(p + (fp / (fp - fq)) * (q - p));
  }
  return out;
}

}  // namespace

IntervalSet to_double(const ExactIntervalSet& s) {
  std::vector<Interval<double>> parts;
  for (const auto& p : s.intervals()) parts.push_back({p.lo.to_double(), p.hi.to_double()});
  return IntervalSet(std::move(parts));
}

// ---- ConvexPolygon ---------------------------------------------------------

ConvexPolygon ConvexPolygon::hull(std::vector<Point2> pts) {
  ConvexPolygon out;
  if (pts.empty()) return out;
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  double scale = 0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-13 * std::max(scale * scale, 1e-300);
  // coincident points
  std::vector<Point2> uniq;
  for (const auto& p : pts)
    if (uniq.empty() || (p - uniq.back()).cwiseAbs().maxCoeff() > 1e-13 * std::max(scale, 1.0))
      uniq.push_back(p);
  if (uniq.size() <= 2) {
    out.v_ = uniq;
    return out;
  }
  std::vector<Point2> h(2 * uniq.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], uniq[i]) <= tol) --k;
    h[k++] = uniq[i];
  }
  for (std::size_t i = uniq.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], uniq[i]) <= tol) --k;
    h[k++] = uniq[i];
  }
  h.resize(k - 1);
  out.v_ = std::move(h);
  return out;
}

double ConvexPolygon::area() const {
  double a = 0;
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = v_[i];
    const Point2& q = v_[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

bool ConvexPolygon::contains(const Point2& p, double eps) const {
  const std::size_t n = v_.size();
  if (n == 0) return false;
  if (n < 3) return distance(p) <= eps;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = v_[i];
    const Point2& b = v_[(i + 1) % n];
    if (cross(a, b, p) < -eps * (b - a).norm()) return false;
  }
  return true;
}

double ConvexPolygon::distance(const Point2& p) const {
  const std::size_t n = v_.size();
  if (n == 0) throw ArgumentError("distance to an empty polygon");
  if (n == 1) return (p - v_[0]).norm();
  if (n >= 3 && contains(p, 0.0)) return 0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) d = std::min(d, segment_distance(p, v_[i], v_[(i + 1) % n]));
  return d;
}

double ConvexPolygon::support(const Point2& n) const {
  if (v_.empty()) throw ArgumentError("support of an empty polygon");
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& v : v_) s = std::max(s, n.dot(v));
  return s;
}

ConvexPolygon regular_octagon(double edge) {
  const double r = edge / 2;
  const double s = edge * (1 + kSqrt2) / 2;
  return ConvexPolygon::hull({{s, -r}, {s, r}, {r, s}, {-r, s}, {-s, r}, {-s, -r}, {-r, -s},
                              {r, -s}});
}

ConvexPolygon minkowski_sum(const ConvexPolygon& a, const ConvexPolygon& b) {
  std::vector<Point2> pts;
  pts.reserve(a.vertices().size() * b.vertices().size());
  for (const auto& p : a.vertices())
    for (const auto& q : b.vertices()) pts.push_back(p + q);
  return ConvexPolygon::hull(std::move(pts));
}

ConvexPolygon scaled(const ConvexPolygon& p, double c) {
  std::vector<Point2> pts;
  for (const auto& v : p.vertices()) pts.push_back(c * v);
  return ConvexPolygon::hull(std::move(pts));
}

ConvexPolygon erosion(const ConvexPolygon& w, const ConvexPolygon& k) {
  if (k.empty()) throw ArgumentError("erosion by an empty set");
  const auto& wv = w.vertices();
  if (wv.size() < 3) {
    // A point or segment only contains translates of K when K is a point.
    if (k.vertices().size() != 1) return {};
    std::vector<Point2> pts;
    for (const auto& v : wv) pts.push_back(v - k.vertices()[0]);
    return ConvexPolygon::hull(pts);
  }
  // Start from the bounding box of W - K, then cut by every edge of W.
  Point2 lo = wv[0], hi = wv[0];
  for (const auto& v : wv) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  Point2 klo = k.vertices()[0], khi = k.vertices()[0];
  for (const auto& v : k.vertices()) {
    klo = klo.cwiseMin(v);
    khi = khi.cwiseMax(v);
  }
  lo -= khi;
  hi -= klo;
  std::vector<Point2> poly = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  const double tol = 1e-12 * std::max(1.0, (hi - lo).cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < wv.size() && !poly.empty(); ++i) {
    const Point2 d = wv[(i + 1) % wv.size()] - wv[i];
    const Point2 n = Point2(d.y(), -d.x()).normalized();
    const double c = n.dot(wv[i]) - k.support(n);
    poly = clip(poly, n, c + tol);
  }
  return ConvexPolygon::hull(std::move(poly));
}

// ---- PolygonRegion ---------------------------------------------------------

PolygonRegion::PolygonRegion(std::vector<ConvexPolygon> parts) {
  for (auto& p : parts)
    if (!p.empty()) parts_.push_back(std::move(p));
}

bool PolygonRegion::contains(const Point2& p, double eps) const {
  for (const auto& q : parts_)
    if (q.contains(p, eps)) return true;
  return false;
}

double PolygonRegion::distance(const Point2& p) const {
  if (parts_.empty()) throw ArgumentError("distance to an empty region");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& q : parts_) d = std::min(d, q.distance(p));
  return d;
}

double PolygonRegion::area() const {
  double a = 0;
  for (const auto& q : parts_) a += q.area();
  return a;
}

ConvexPolygon PolygonRegion::hull() const {
  std::vector<Point2> pts;
  for (const auto& q : parts_) pts.insert(pts.end(), q.vertices().begin(), q.vertices().end());
  return ConvexPolygon::hull(std::move(pts));
}

PolygonRegion set_union(PolygonRegion a, const PolygonRegion& b) {
  std::vector<ConvexPolygon> all = a.parts();
  all.insert(all.end(), b.parts().begin(), b.parts().end());
  auto inside = [&](std::size_t i, std::size_t j) {
    for (const auto& v : all[i].vertices())
      if (!all[j].contains(v)) return false;
    return true;
  };
  // Drop parts covered by another single part; of two equal parts keep the first.
  std::vector<ConvexPolygon> keep;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < all.size() && !covered; ++j)
      covered = i != j && inside(i, j) && !(j > i && inside(j, i));
    if (!covered) keep.push_back(all[i]);
  }
  if (keep.size() > kMaxParts) throw ResourceError("polygon union exceeds part cap");
  return PolygonRegion(std::move(keep));
}

PolygonRegion minkowski_sum(const PolygonRegion& a, const PolygonRegion& b) {
  std::vector<ConvexPolygon> parts;
  for (const auto& p : a.parts())
    for (const auto& q : b.parts()) parts.push_back(minkowski_sum(p, q));
  if (parts.size() > kMaxParts) throw ResourceError("polygon union exceeds part cap");
  return PolygonRegion(std::move(parts));
}

// ---- Hausdorff -------------------------------------------------------------

namespace {

double point_to_set(double x, const IntervalSet& v) {
  const auto& iv = v.intervals();
  auto it = std::lower_bound(iv.begin(), iv.end(), x,
                             [](const Interval<double>& p, double y) { return p.hi < y; });
  double d = std::numeric_limits<double>::infinity();
  if (it != iv.end()) d = std::max(0.0, it->lo - x);
  if (it != iv.begin()) d = std::min(d, x - std::prev(it)->hi);
  return d;
}

double directed(const IntervalSet& u, const IntervalSet& v) {
  double d = 0;
  for (const auto& p : u.intervals()) {
    d = std::max({d, point_to_set(p.lo, v), point_to_set(p.hi, v)});
  }
  // midpoints of gaps of v that fall inside u
  const auto& iv = v.intervals();
  for (std::size_t k = 0; k + 1 < iv.size(); ++k) {
    const double mid = 0.5 * (iv[k].hi + iv[k + 1].lo);
    if (u.contains(mid)) d = std::max(d, point_to_set(mid, v));
  }
  return d;
}

std::vector<Point2> boundary_samples(const PolygonRegion& r, int per_edge) {
  std::vector<Point2> pts;
  for (const auto& q : r.parts()) {
    const auto& v = q.vertices();
    const std::size_t n = v.size();
    if (n == 1) {
      pts.push_back(v[0]);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = v[i];
      const Point2& b = v[(i + 1) % n];
      for (int s = 0; s < per_edge; ++s) pts.push_back(a + (static_cast<double>(s) / per_edge) * (b - a));
    }
  }
  return pts;
}

}  // namespace

double hausdorff_distance(const IntervalSet& u, const IntervalSet& v) {
  if (u.empty() || v.empty()) throw ArgumentError("Hausdorff distance of an empty set");
  return std::max(directed(u, v), directed(v, u));
}

double hausdorff_distance(const PolygonRegion& u, const PolygonRegion& v, int edge_samples) {
  if (u.empty() || v.empty()) throw ArgumentError("Hausdorff distance of an empty set");
  if (edge_samples < 1) throw ArgumentError("edge_samples must be positive");
  const bool convex = u.parts().size() == 1 && v.parts().size() == 1;
  // For convex sets the distance to the other set is convex, so vertices suffice.
  const int per_edge = convex ? 1 : edge_samples;
  double d = 0;
  for (const auto& p : boundary_samples(u, per_edge)) d = std::max(d, v.distance(p));
  for (const auto& p : boundary_samples(v, per_edge)) d = std::max(d, u.distance(p));
  return d;
}

double hausdorff_distance(const CompactSet& u, const CompactSet& v) {
  if (u.index() != v.index()) throw ArgumentError("Hausdorff distance across dimensions");
  if (auto* a = std::get_if<IntervalSet>(&u)) return hausdorff_distance(*a, std::get<IntervalSet>(v));
  return hausdorff_distance(std::get<PolygonRegion>(u), std::get<PolygonRegion>(v));
}

// ---- affine images ---------------------------------------------------------

IntervalSet apply_affine(const AffineMap1D& f, const IntervalSet& s) {
  std::vector<Interval<double>> parts;
  for (const auto& p : s.intervals()) {
    double lo = f(p.lo), hi = f(p.hi);
    if (hi < lo) std::swap(lo, hi);
    parts.push_back({lo, hi});
  }
  return IntervalSet(std::move(parts));
}

ExactIntervalSet apply_affine(const ExactAffineMap1D& f, const ExactIntervalSet& s) {
  std::vector<Interval<QuadRat>> parts;
  for (const auto& p : s.intervals()) {
    QuadRat lo = f(p.lo), hi = f(p.hi);
    if (hi < lo) std::swap(lo, hi);
    parts.push_back({lo, hi});
  }
  return ExactIntervalSet(std::move(parts));
}

ConvexPolygon apply_affine(const AffineMap2D& f, const ConvexPolygon& s) {
  std::vector<Point2> pts;
  for (const auto& v : s.vertices()) pts.push_back(f(v));
  return ConvexPolygon::hull(std::move(pts));
}

PolygonRegion apply_affine(const AffineMap2D& f, const PolygonRegion& s) {
  std::vector<ConvexPolygon> parts;
  for (const auto& q : s.parts()) parts.push_back(apply_affine(f, q));
  return PolygonRegion(std::move(parts));
}

Ifs1D to_double(const ExactIfs1D& s) {
  std::vector<std::vector<Ifs1D::Entry>> e(s.size(), std::vector<Ifs1D::Entry>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      for (const auto& f : s.entry(i, j).maps) e[i][j].maps.push_back(f.approx());
      for (const auto& f : s.entry(i, j).swept)
        e[i][j].swept.push_back({f.linear.approx(), to_double(f.region)});
    }
  return Ifs1D(std::move(e));
}

// ---- attractor iteration ---------------------------------------------------

namespace {

constexpr std::size_t kMaxIteratedParts = 100000;

std::size_t part_count(const IntervalSet& s) { return s.size(); }
std::size_t part_count(const PolygonRegion& s) { return s.parts().size(); }

template <class Set, class Map>
AttractorResult<Set> iterate_impl(const IfsSystem<Set, Map>& sys, std::vector<Set> cur,
                                  double tol, int max_iter) {
  if (!(tol > 0)) throw ArgumentError("tol must be positive");
  if (max_iter < 1) throw ArgumentError("max_iter must be positive");
  if (cur.size() != sys.size()) throw ArgumentError("one seed per component required");
  for (const auto& s : cur)
    if (s.empty()) throw ArgumentError("empty seed");
  AttractorResult<Set> res;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<Set> next = sys.apply(cur);
    for (const auto& c : next)
      if (part_count(c) > kMaxIteratedParts)
        throw ResourceError("attractor iterate fragmented beyond part cap");
    double delta = 0;
    for (std::size_t i = 0; i < cur.size(); ++i)
      delta = std::max(delta, hausdorff_distance(next[i], cur[i]));
    res.deltas.push_back(delta);
    cur = std::move(next);
    if (delta < tol) {
      res.components = std::move(cur);
      res.iterations = it;
      res.final_delta = delta;
      return res;
    }
  }
  throw NonConvergenceError("attractor iteration did not reach tolerance", max_iter,
                            res.deltas.back());
}

}  // namespace

AttractorResult<IntervalSet> iterate_attractor(const Ifs1D& sys, std::vector<IntervalSet> seeds,
                                               double tol, int max_iter) {
  return iterate_impl(sys, std::move(seeds), tol, max_iter);
}

AttractorResult<PolygonRegion> iterate_attractor(const Ifs2D& sys,
                                                 std::vector<PolygonRegion> seeds, double tol,
                                                 int max_iter) {
  return iterate_impl(sys, std::move(seeds), tol, max_iter);
}

FixedPointReport verify_exact_fixed_point(const ExactIfs1D& sys,
                                          const std::vector<ExactIntervalSet>& candidate) {
  FixedPointReport rep;
  if (candidate.size() != sys.size()) {
    rep.mismatches.push_back("component count mismatch");
    return rep;
  }
  const auto images = sys.apply(candidate);
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (!(images[i] == candidate[i]))
      rep.mismatches.push_back("component " + std::to_string(i + 1) + ": candidate " +
                               to_string(candidate[i]) + ", images " + to_string(images[i]));
  }
  rep.holds = rep.mismatches.empty();
  return rep;
}

std::string to_string(const IntervalSet& s) {
  std::string out;
  for (const auto& p : s.intervals()) {
    if (!out.empty()) out += " U ";
    out += "[" + fmt(p.lo) + ", " + fmt(p.hi) + "]";
  }
  return out.empty() ? "{}" : out;
}

std::string to_string(const ExactIntervalSet& s) {
  std::string out;
  for (const auto& p : s.intervals()) {
    if (!out.empty()) out += " U ";
    out += "[" + to_string(p.lo) + ", " + to_string(p.hi) + "]";
  }
  return out.empty() ? "{}" : out;
}

}  // namespace selfsim
