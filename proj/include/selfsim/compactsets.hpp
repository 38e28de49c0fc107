#pragma once

// Compact subsets of R (finite unions of closed intervals) and R^2 (finite
// unions of convex polygons), affine images, the Hausdorff metric and
// attractor iteration for multi-component function systems.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "selfsim/errors.hpp"
#include "selfsim/numberfields.hpp"

namespace selfsim {

inline double to_real(double x) { return x; }
inline double to_real(const QuadRat& x) { return x.to_double(); }

// Touching tolerance used when normalizing interval unions.
template <class T>
inline T merge_epsilon() {
  return T(0);
}
template <>
inline double merge_epsilon<double>() {
  return 1e-12;
}

template <class T>
struct Interval {
  T lo;
  T hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of closed intervals, kept sorted, disjoint and merged where
/// touching. T is double or QuadRat.
template <class T>
class BasicIntervalSet {
 public:
  BasicIntervalSet() = default;
  BasicIntervalSet(T lo, T hi) { add(lo, hi); normalize(); }
  explicit BasicIntervalSet(std::vector<Interval<T>> parts) : parts_(std::move(parts)) {
    for (const auto& p : parts_)
      if (p.hi < p.lo) throw ArgumentError("interval with lo > hi");
    normalize();
  }
  static BasicIntervalSet point(T x) { return BasicIntervalSet(x, x); }

  const std::vector<Interval<T>>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }
  T min() const { require(); return parts_.front().lo; }
  T max() const { require(); return parts_.back().hi; }

  T measure() const {
    T s(0);
    for (const auto& p : parts_) s = s + (p.hi - p.lo);
    return s;
  }

  bool contains(const T& x) const {
    for (const auto& p : parts_)
      if (!(x < p.lo) && !(p.hi < x)) return true;
    return false;
  }

  // Union with another set.
  BasicIntervalSet& unite(const BasicIntervalSet& o) {
    parts_.insert(parts_.end(), o.parts_.begin(), o.parts_.end());
    normalize();
    return *this;
  }

  friend bool operator==(const BasicIntervalSet&, const BasicIntervalSet&) = default;

 private:
  void add(T lo, T hi) {
    if (hi < lo) throw ArgumentError("interval with lo > hi");
    parts_.push_back({lo, hi});
  }
  void require() const {
    if (parts_.empty()) throw ArgumentError("empty interval set");
  }
  void normalize() {
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval<T>& x, const Interval<T>& y) { return x.lo < y.lo; });
    std::vector<Interval<T>> out;
    const T eps = merge_epsilon<T>();
    for (const auto& p : parts_) {
      if (!out.empty() && !(out.back().hi + eps < p.lo)) {
        if (out.back().hi < p.hi) out.back().hi = p.hi;
      } else {
        out.push_back(p);
      }
    }
    parts_ = std::move(out);
  }

  std::vector<Interval<T>> parts_;
};

using IntervalSet = BasicIntervalSet<double>;
using ExactIntervalSet = BasicIntervalSet<QuadRat>;

IntervalSet to_double(const ExactIntervalSet& s);

template <class T>
BasicIntervalSet<T> set_union(BasicIntervalSet<T> a, const BasicIntervalSet<T>& b) {
  return a.unite(b);
}

template <class T>
BasicIntervalSet<T> intersect(const BasicIntervalSet<T>& a, const BasicIntervalSet<T>& b) {
  std::vector<Interval<T>> out;
  for (const auto& p : a.intervals())
    for (const auto& q : b.intervals()) {
      const T lo = p.lo < q.lo ? q.lo : p.lo;
      const T hi = p.hi < q.hi ? p.hi : q.hi;
      if (!(hi < lo)) out.push_back({lo, hi});
    }
  return BasicIntervalSet<T>(std::move(out));
}

template <class T>
BasicIntervalSet<T> minkowski_sum(const BasicIntervalSet<T>& a, const BasicIntervalSet<T>& b) {
  std::vector<Interval<T>> out;
  for (const auto& p : a.intervals())
    for (const auto& q : b.intervals()) out.push_back({p.lo + q.lo, p.hi + q.hi});
  return BasicIntervalSet<T>(std::move(out));
}

/// {b : K + b is contained in U}. Exact for exact endpoints.
template <class T>
BasicIntervalSet<T> erosion(const BasicIntervalSet<T>& u, const BasicIntervalSet<T>& k) {
  if (k.empty()) throw ArgumentError("erosion by an empty set");
  std::optional<BasicIntervalSet<T>> acc;
  for (const auto& c : k.intervals()) {
    std::vector<Interval<T>> fits;
    for (const auto& i : u.intervals()) {
      const T lo = i.lo - c.lo;
      const T hi = i.hi - c.hi;
      if (!(hi < lo)) fits.push_back({lo, hi});
    }
    BasicIntervalSet<T> here(std::move(fits));
    acc = acc ? intersect(*acc, here) : here;
  }
  return *acc;
}

/// Convex polygon with counterclockwise vertices. One vertex is a point,
/// two vertices a segment.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  // Convex hull of the given points; collinear vertices are dropped.
  static ConvexPolygon hull(std::vector<Point2> pts);

  const std::vector<Point2>& vertices() const { return v_; }
  bool empty() const { return v_.empty(); }
  double area() const;
  bool contains(const Point2& p, double eps = 1e-12) const;
  double distance(const Point2& p) const;
  // max over vertices of n . v
  double support(const Point2& n) const;

 private:
  std::vector<Point2> v_;
};

ConvexPolygon regular_octagon(double edge);
ConvexPolygon minkowski_sum(const ConvexPolygon& a, const ConvexPolygon& b);
ConvexPolygon scaled(const ConvexPolygon& p, double c);
/// {b : K + b in W}; empty polygon when no translate fits.
ConvexPolygon erosion(const ConvexPolygon& w, const ConvexPolygon& k);

/// Finite union of convex polygons.
class PolygonRegion {
 public:
  PolygonRegion() = default;
  PolygonRegion(ConvexPolygon p) { if (!p.empty()) parts_.push_back(std::move(p)); }  // NOLINT
  explicit PolygonRegion(std::vector<ConvexPolygon> parts);

  const std::vector<ConvexPolygon>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  bool contains(const Point2& p, double eps = 1e-12) const;
  double distance(const Point2& p) const;
  // Sum of part areas (exact when parts only touch).
  double area() const;
  ConvexPolygon hull() const;

 private:
  std::vector<ConvexPolygon> parts_;
};

PolygonRegion set_union(PolygonRegion a, const PolygonRegion& b);
PolygonRegion minkowski_sum(const PolygonRegion& a, const PolygonRegion& b);

using CompactSet = std::variant<IntervalSet, PolygonRegion>;

// Boundary sample density for non-convex 2D Hausdorff evaluation.
inline constexpr int kDefaultEdgeSamples = 256;

double hausdorff_distance(const IntervalSet& u, const IntervalSet& v);
double hausdorff_distance(const PolygonRegion& u, const PolygonRegion& v,
                          int edge_samples = kDefaultEdgeSamples);
double hausdorff_distance(const CompactSet& u, const CompactSet& v);

// x -> a x + v
struct AffineMap1D {
  double a = 1;
  double v = 0;
  double operator()(double x) const { return a * x + v; }
  double contraction() const { return std::abs(a); }
  double modulus() const { return 1.0 / std::abs(a); }
};

struct ExactAffineMap1D {
  QuadRat a{1};
  QuadRat v{0};
  QuadRat operator()(const QuadRat& x) const { return a * x + v; }
  double contraction() const { return std::abs(a.to_double()); }
  double modulus() const { return 1.0 / contraction(); }
  AffineMap1D approx() const { return {a.to_double(), v.to_double()}; }
};

// x -> A x + v
struct AffineMap2D {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  Point2 v = Point2::Zero();
  Point2 operator()(const Point2& x) const { return A * x + v; }
  // Operator norm induced by the sup-norm.
  double contraction() const { return A.cwiseAbs().rowwise().sum().maxCoeff(); }
  double modulus() const { return 1.0 / std::abs(A.determinant()); }
};

IntervalSet apply_affine(const AffineMap1D& f, const IntervalSet& s);
ExactIntervalSet apply_affine(const ExactAffineMap1D& f, const ExactIntervalSet& s);
ConvexPolygon apply_affine(const AffineMap2D& f, const ConvexPolygon& s);
PolygonRegion apply_affine(const AffineMap2D& f, const PolygonRegion& s);

/// Continuous family {x -> linear(x) + u : u in region}; its image of S is
/// linear(S) + region (Minkowski sum).
template <class Set, class Map>
struct SweptFamily {
  Map linear;
  Set region;
};

/// Maps sending component j into component i.
template <class Set, class Map>
struct IfsEntry {
  std::vector<Map> maps;
  std::vector<SweptFamily<Set, Map>> swept;
  bool empty() const { return maps.empty() && swept.empty(); }
};

template <class Set, class Map>
class IfsSystem {
 public:
  using Entry = IfsEntry<Set, Map>;

  IfsSystem() = default;
  explicit IfsSystem(std::vector<std::vector<Entry>> entries) : e_(std::move(entries)) {
    const std::size_t n = e_.size();
    if (n == 0) throw ArgumentError("system without components");
    for (std::size_t i = 0; i < n; ++i) {
      if (e_[i].size() != n) throw ArgumentError("system entries must form a square matrix");
      bool any = false;
      for (const auto& x : e_[i]) any = any || !x.empty();
      if (!any) throw ArgumentError("component " + std::to_string(i + 1) + " receives no maps");
    }
  }

  std::size_t size() const { return e_.size(); }
  const Entry& entry(std::size_t i, std::size_t j) const { return e_.at(i).at(j); }

  double contraction_bound() const {
    double r = 0;
    for (const auto& row : e_)
      for (const auto& x : row) {
        for (const auto& f : x.maps) r = std::max(r, f.contraction());
        for (const auto& f : x.swept) r = std::max(r, f.linear.contraction());
      }
    return r;
  }

  // One application of the union map to all components.
  std::vector<Set> apply(const std::vector<Set>& comps) const {
    if (comps.size() != size()) throw ArgumentError("component count mismatch");
    std::vector<Set> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = 0; j < size(); ++j) {
        const Entry& x = e_[i][j];
        for (const auto& f : x.maps) out[i] = set_union(out[i], apply_affine(f, comps[j]));
        for (const auto& f : x.swept)
          out[i] = set_union(out[i], minkowski_sum(apply_affine(f.linear, comps[j]), f.region));
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<Entry>> e_;
};

using Ifs1D = IfsSystem<IntervalSet, AffineMap1D>;
using ExactIfs1D = IfsSystem<ExactIntervalSet, ExactAffineMap1D>;
using Ifs2D = IfsSystem<PolygonRegion, AffineMap2D>;

Ifs1D to_double(const ExactIfs1D& s);

template <class Set>
struct AttractorResult {
  std::vector<Set> components;
  int iterations = 0;
  double final_delta = 0;
  std::vector<double> deltas;  // sup over components of d_H between iterates
};

inline constexpr int kDefaultAttractorMaxIter = 200;

AttractorResult<IntervalSet> iterate_attractor(const Ifs1D& sys, std::vector<IntervalSet> seeds,
                                               double tol, int max_iter = kDefaultAttractorMaxIter);
AttractorResult<PolygonRegion> iterate_attractor(const Ifs2D& sys,
                                                 std::vector<PolygonRegion> seeds, double tol,
                                                 int max_iter = kDefaultAttractorMaxIter);

struct FixedPointReport {
  bool holds = false;
  std::vector<std::string> mismatches;
};

/// Decides in exact arithmetic whether each candidate component equals the
/// union of its images.
FixedPointReport verify_exact_fixed_point(const ExactIfs1D& sys,
                                          const std::vector<ExactIntervalSet>& candidate);

std::string to_string(const IntervalSet& s);
std::string to_string(const ExactIntervalSet& s);

}  // namespace selfsim
