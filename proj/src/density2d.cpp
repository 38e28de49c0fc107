// Planar density solver for A = a * identity and a uniform family on a
// union of convex polygons.

#include <algorithm>
#include <cmath>
#include <map>

#include "selfsim/measures.hpp"

namespace selfsim {
namespace {

struct Grid2 {
  int fx = 0, fy = 0;  // first node index per axis
  int nx = 0, ny = 0;
  std::vector<double> w;

  double at(int x, int y) const {
    x -= fx;
    y -= fy;
    return (x < 0 || y < 0 || x >= nx || y >= ny) ? 0.0 : w[static_cast<std::size_t>(y) * nx + x];
  }
  double bilinear(double tx, double ty) const {
    const double flx = std::floor(tx), fly = std::floor(ty);
    const auto ix = static_cast<int>(flx), iy = static_cast<int>(fly);
    const double u = tx - flx, v = ty - fly;
    return (1 - u) * (1 - v) * at(ix, iy) + u * (1 - v) * at(ix + 1, iy) +
           (1 - u) * v * at(ix, iy + 1) + u * v * at(ix + 1, iy + 1);
  }
  long double sum() const {
    long double s = 0;
    for (double x : w) s += x;
    return s;
  }
};

struct Run2 {
  int lo, hi;
  double w;
};

// Kernel rows keyed by y offset, each a list of x runs of equal mass.
using Kernel2 = std::map<int, std::vector<Run2>>;

double polygon_area(const std::vector<Point2>& p) {
  double a = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2& u = p[i];
    const Point2& v = p[(i + 1) % p.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * std::abs(a);
}

double cell_coverage(const ConvexPolygon& poly, const Point2& c, double h) {
  std::vector<Point2> cell = {c + Point2(-h / 2, -h / 2), c + Point2(h / 2, -h / 2),
                              c + Point2(h / 2, h / 2), c + Point2(-h / 2, h / 2)};
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size() && !cell.empty(); ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % v.size()];
    // keep the left side of a -> b
    std::vector<Point2> out;
    auto side = [&](const Point2& p) { return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()); };
    for (std::size_t k = 0; k < cell.size(); ++k) {
      const Point2& p = cell[k];
      const Point2& q = cell[(k + 1) % cell.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) out.push_back(p);
      if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    cell = std::move(out);
  }
  return cell.size() < 3 ? 0.0 : polygon_area(cell);
}

// Cell-coverage masses on the lattice, with the mass of nodes outside the
// region moved to their nearest inside neighbours (split evenly on ties).
Kernel2 make_kernel(const UniformFamily2D& f, double h) {
  if (f.region.empty()) throw ArgumentError("uniform family on an empty region");
  const double area = f.region.area();
  if (!(area > 0)) throw ArgumentError("uniform family needs a region of positive area");
  const ConvexPolygon hull = f.region.hull();
  Point2 lo = hull.vertices()[0], hi = lo;
  for (const auto& v : hull.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int x0 = static_cast<int>(std::floor(lo.x() / h)) - 1, x1 = static_cast<int>(std::ceil(hi.x() / h)) + 1;
  const int y0 = static_cast<int>(std::floor(lo.y() / h)) - 1, y1 = static_cast<int>(std::ceil(hi.y() / h)) + 1;
  const int nx = x1 - x0 + 1, ny = y1 - y0 + 1;
  std::vector<double> cov(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<char> inside(cov.size(), 0);
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y - y0) * nx + (x - x0); };
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const Point2 c(x * h, y * h);
      double a = 0;
      for (const auto& p : f.region.parts()) a += cell_coverage(p, c, h);
      cov[idx(x, y)] = a;
      inside[idx(x, y)] = f.region.contains(c, 0.0) ? 1 : 0;
    }
  std::vector<double> mass(cov.size(), 0.0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double a = cov[idx(x, y)];
      if (a == 0) continue;
      if (inside[idx(x, y)]) {
        mass[idx(x, y)] += a;
        continue;
      }
      std::vector<std::size_t> to;
      for (const auto& d : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        const int u = x + d.first, v = y + d.second;
        if (u >= x0 && u <= x1 && v >= y0 && v <= y1 && inside[idx(u, v)]) to.push_back(idx(u, v));
      }
      if (to.empty())
        for (const auto& d : {std::pair{1, 1}, std::pair{-1, 1}, std::pair{1, -1}, std::pair{-1, -1}}) {
          const int u = x + d.first, v = y + d.second;
          if (u >= x0 && u <= x1 && v >= y0 && v <= y1 && inside[idx(u, v)]) to.push_back(idx(u, v));
        }
      if (to.empty()) {
        mass[idx(x, y)] += a;  // isolated sliver; keep in place
        continue;
      }
      for (auto t : to) mass[t] += a / static_cast<double>(to.size());
    }
  long double total = 0;
  for (double m : mass) total += m;
  const double scale = f.mass / static_cast<double>(total);
  Kernel2 k;
  for (int y = y0; y <= y1; ++y) {
    std::vector<Run2> runs;
    for (int x = x0; x <= x1; ++x) {
      const double m = mass[idx(x, y)] * scale;
      if (m == 0) continue;
      if (!runs.empty() && runs.back().hi == x - 1 && runs.back().w == m) {
        runs.back().hi = x;
      } else {
        runs.push_back({x, x, m});
      }
    }
    if (!runs.empty()) k[y] = std::move(runs);
  }
  return k;
}

Grid2 resample(const Grid2& g, double a) {
  const double alpha = 1 / (a * a);
  auto range = [&](int first, int n, int& lo, int& hi) {
    const double e0 = a * (first - 1), e1 = a * (first + n);
    lo = static_cast<int>(std::floor(std::min(e0, e1)));
    hi = static_cast<int>(std::ceil(std::max(e0, e1)));
  };
  int xlo, xhi, ylo, yhi;
  range(g.fx, g.nx, xlo, xhi);
  range(g.fy, g.ny, ylo, yhi);
  Grid2 out;
  out.fx = xlo;
  out.fy = ylo;
  out.nx = xhi - xlo + 1;
  out.ny = yhi - ylo + 1;
  out.w.assign(static_cast<std::size_t>(out.nx) * out.ny, 0.0);
  for (int y = ylo; y <= yhi; ++y)
    for (int x = xlo; x <= xhi; ++x)
      out.w[static_cast<std::size_t>(y - ylo) * out.nx + (x - xlo)] =
          alpha * g.bilinear(static_cast<double>(x) / a, static_cast<double>(y) / a);
  return out;
}

Grid2 trim(const Grid2& g) {
  int x0 = g.nx, x1 = -1, y0 = g.ny, y1 = -1;
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x)
      if (g.w[static_cast<std::size_t>(y) * g.nx + x] != 0) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  Grid2 out;
  if (x1 < 0) return out;
  out.fx = g.fx + x0;
  out.fy = g.fy + y0;
  out.nx = x1 - x0 + 1;
  out.ny = y1 - y0 + 1;
  out.w.resize(static_cast<std::size_t>(out.nx) * out.ny);
  for (int y = 0; y < out.ny; ++y)
    for (int x = 0; x < out.nx; ++x)
      out.w[static_cast<std::size_t>(y) * out.nx + x] = g.w[static_cast<std::size_t>(y + y0) * g.nx + (x + x0)];
  return out;
}

constexpr int kShortRun = 8;

Grid2 convolve(const Kernel2& k, const Grid2& t) {
  int rlo = 0, rhi = 0, dylo = k.begin()->first, dyhi = k.rbegin()->first;
  bool first = true;
  for (const auto& [dy, runs] : k)
    for (const auto& r : runs) {
      rlo = first ? r.lo : std::min(rlo, r.lo);
      rhi = first ? r.hi : std::max(rhi, r.hi);
      first = false;
    }
  Grid2 out;
  out.fx = t.fx + rlo;
  out.fy = t.fy + dylo;
  out.nx = t.nx + rhi - rlo;
  out.ny = t.ny + dyhi - dylo;
  out.w.assign(static_cast<std::size_t>(out.nx) * out.ny, 0.0);
  // prefix and suffix sums per source row; each window uses the nearer end
  const std::size_t stride = static_cast<std::size_t>(t.nx) + 1;
  std::vector<long double> P(static_cast<std::size_t>(t.ny) * stride, 0.0L), S(P.size(), 0.0L);
  for (int y = 0; y < t.ny; ++y) {
    long double* row = &P[static_cast<std::size_t>(y) * stride];
    long double* suf = &S[static_cast<std::size_t>(y) * stride];
    const double* src = &t.w[static_cast<std::size_t>(y) * t.nx];
    for (int x = 0; x < t.nx; ++x) row[x + 1] = row[x] + src[x];
    for (int x = t.nx; x-- > 0;) suf[x] = suf[x + 1] + src[x];
  }
  std::vector<double> acc(static_cast<std::size_t>(out.nx));
  for (int oy = 0; oy < out.ny; ++oy) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const int iy = out.fy + oy;
    for (const auto& [dy, runs] : k) {
      const int sy = iy - dy - t.fy;
      if (sy < 0 || sy >= t.ny) continue;
      const long double* row = &P[static_cast<std::size_t>(sy) * stride];
      const long double* suf = &S[static_cast<std::size_t>(sy) * stride];
      const double* src = &t.w[static_cast<std::size_t>(sy) * t.nx];
      for (const auto& r : runs) {
        if (r.hi - r.lo < kShortRun) {
          // boundary nodes: plain shifted adds, no cancellation
          for (int dx = r.lo; dx <= r.hi; ++dx) {
            double* dst = &acc[static_cast<std::size_t>(t.fx + dx - out.fx)];
            for (int x = 0; x < t.nx; ++x) dst[x] += r.w * src[x];
          }
          continue;
        }
        const int ox0 = t.fx + r.lo - out.fx, ox1 = t.fx + t.nx - 1 + r.hi - out.fx;
        for (int ox = ox0; ox <= ox1; ++ox) {
          const int ix = out.fx + ox;
          const int p = std::clamp(ix - r.hi - t.fx, 0, t.nx);
          const int q = std::clamp(ix - r.lo - t.fx + 1, 0, t.nx);
          if (q <= p) continue;
          const long double win = p + q <= t.nx ? row[q] - row[p] : suf[p] - suf[q];
          acc[static_cast<std::size_t>(ox)] += r.w * static_cast<double>(win);
        }
      }
    }
    std::copy(acc.begin(), acc.end(), out.w.begin() + static_cast<std::ptrdiff_t>(oy) * out.nx);
  }
  return trim(out);
}

double l1(const Grid2& f, const Grid2& g) {
  const int x0 = std::min(f.fx, g.fx), y0 = std::min(f.fy, g.fy);
  const int x1 = std::max(f.fx + f.nx, g.fx + g.nx), y1 = std::max(f.fy + f.ny, g.fy + g.ny);
  long double s = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) s += std::abs(f.at(x, y) - g.at(x, y));
  return static_cast<double>(s);
}

GridDensity2D to_density(const Grid2& g, double h) {
  GridDensity2D d;
  d.origin = Point2(g.fx * h, g.fy * h);
  d.step = h;
  d.nx = g.nx;
  d.ny = g.ny;
  d.weights = g.w;
  return d;
}

}  // namespace

DensityResult2D solve_density_2d(const UniformFamily2D& nu, double a, const SolveOptions& opt) {
  if (!(opt.step > 0)) throw ArgumentError("grid step must be positive");
  if (!(opt.tol > 0)) throw ArgumentError("tol must be positive");
  if (opt.max_iter < 1) throw ArgumentError("max_iter must be positive");
  if (!(std::abs(a) < 1) || a == 0) throw ArgumentError("automorphism must be a contraction");
  if (std::abs(nu.mass - 1) > 1e-9) throw ArgumentError("family must be a probability measure");
  const double h = opt.step;
  const double h2 = h * h;
  const Kernel2 k = make_kernel(nu, h);
  // seed: the sampled family itself, as a density
  Grid2 cur;
  {
    int x0 = 0, x1 = 0;
    bool firstrun = true;
    for (const auto& [dy, runs] : k)
      for (const auto& r : runs) {
        x0 = firstrun ? r.lo : std::min(x0, r.lo);
        x1 = firstrun ? r.hi : std::max(x1, r.hi);
        firstrun = false;
      }
    cur.fx = x0;
    cur.fy = k.begin()->first;
    cur.nx = x1 - x0 + 1;
    cur.ny = k.rbegin()->first - cur.fy + 1;
    cur.w.assign(static_cast<std::size_t>(cur.nx) * cur.ny, 0.0);
    for (const auto& [dy, runs] : k)
      for (const auto& r : runs)
        for (int x = r.lo; x <= r.hi; ++x)
          cur.w[static_cast<std::size_t>(dy - cur.fy) * cur.nx + (x - x0)] = r.w / h2;
  }
  DensityResult2D res;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Grid2 next = convolve(k, resample(cur, a));
    const double m = static_cast<double>(next.sum()) * h2;
    if (!(m > 0)) throw ArgumentError("density lost all mass");
    for (double& v : next.w) v *= nu.mass / m;
    const double delta = l1(next, cur) * h2;
    res.deltas.push_back(delta);
    cur = std::move(next);
    if (delta < opt.tol) {
      res.density = to_density(cur, h);
      res.iterations = it;
      res.final_delta = delta;
      return res;
    }
  }
  throw NonConvergenceError("planar density iteration did not reach tolerance", opt.max_iter,
                            res.deltas.back());
}

}  // namespace selfsim
