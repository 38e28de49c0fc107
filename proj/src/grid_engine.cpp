#include "grid_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace selfsim::detail {

double LatticeGrid::interp(double t) const {
  const double fl = std::floor(t);
  const auto i = static_cast<std::int64_t>(fl);
  const double f = t - fl;
  if (f == 0) return at(i);
  return (1 - f) * at(i) + f * at(i + 1);
}

double LatticeGrid::sum() const {
  long double s = 0;
  for (double v : w) s += v;
  return static_cast<double>(s);
}

void LatticeGrid::trim() {
  std::size_t b = 0, e = w.size();
  while (b < e && w[b] == 0) ++b;
  while (e > b && w[e - 1] == 0) --e;
  if (b == e) {
    w.clear();
    first = 0;
    return;
  }
  first += static_cast<std::int64_t>(b);
  w = std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(b),
                          w.begin() + static_cast<std::ptrdiff_t>(e));
}

void LatticeGrid::ensure(std::int64_t lo, std::int64_t hi) {
  if (w.empty()) {
    first = lo;
    w.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    return;
  }
  if (lo < first) {
    w.insert(w.begin(), static_cast<std::size_t>(first - lo), 0.0);
    first = lo;
  }
  if (hi > last()) w.resize(static_cast<std::size_t>(hi - first + 1), 0.0);
}

double l1(const LatticeGrid& f, const LatticeGrid& g) {
  if (f.empty() && g.empty()) return 0;
  const std::int64_t lo = f.empty() ? g.first : (g.empty() ? f.first : std::min(f.first, g.first));
  const std::int64_t hi = f.empty() ? g.last() : (g.empty() ? f.last() : std::max(f.last(), g.last()));
  long double s = 0;
  for (std::int64_t i = lo; i <= hi; ++i) s += std::abs(f.at(i) - g.at(i));
  return static_cast<double>(s);
}

LatticeGrid from_density(const GridDensity1D& g) {
  if (!(g.step > 0)) throw ArgumentError("grid step must be positive");
  const double r = g.origin / g.step;
  const double fr = std::round(r);
  if (std::abs(r - fr) > 1e-6) throw ArgumentError("grid origin is not a multiple of the step");
  LatticeGrid out;
  out.first = static_cast<std::int64_t>(fr);
  out.w = g.weights;
  return out;
}

GridDensity1D to_density(const LatticeGrid& g, double step) {
  GridDensity1D out;
  out.step = step;
  out.origin = static_cast<double>(g.first) * step;
  out.weights = g.w;
  return out;
}

double Kernel1D::mass() const {
  long double s = 0;
  for (const auto& r : runs) s += static_cast<long double>(r.hi - r.lo + 1) * r.w;
  for (const auto& a : atoms) s += a.w;
  return static_cast<double>(s);
}

std::vector<Run> run_length(const LatticeGrid& m) {
  std::vector<Run> runs;
  for (std::size_t k = 0; k < m.w.size(); ++k) {
    const double v = m.w[k];
    const std::int64_t i = m.first + static_cast<std::int64_t>(k);
    if (v == 0) continue;
    if (!runs.empty() && runs.back().hi == i - 1 && runs.back().w == v) {
      runs.back().hi = i;
    } else {
      runs.push_back({i, i, v});
    }
  }
  return runs;
}

// Node masses of a uniform family; see sample_family.
LatticeGrid coverage_masses(const UniformFamily& f, double step) {
  if (f.region.empty()) throw ArgumentError("uniform family on an empty region");
  const double theta = f.region.measure();
  if (!(theta > 0)) throw ArgumentError("uniform family needs a region of positive measure");
  const double rho = f.mass / theta * step;  // mass per grid unit
  std::map<std::int64_t, double> nodes;
  for (const auto& p : f.region.intervals()) {
    const double cu = p.lo / step, du = p.hi / step;
    const auto jlo = static_cast<std::int64_t>(std::ceil(cu));
    const auto jhi = static_cast<std::int64_t>(std::floor(du));
    if (jlo > jhi) {
      nodes[static_cast<std::int64_t>(std::llround(0.5 * (cu + du)))] += rho * (du - cu);
    } else if (jlo == jhi) {
      nodes[jlo] += rho * (du - cu);
    } else {
      // each end node also takes the overhang of its outside neighbour
      nodes[jlo] += rho * ((static_cast<double>(jlo) - cu) + 0.5);
      nodes[jhi] += rho * ((du - static_cast<double>(jhi)) + 0.5);
      for (std::int64_t j = jlo + 1; j < jhi; ++j) nodes[j] += rho;
    }
  }
  LatticeGrid out;
  out.ensure(nodes.begin()->first, nodes.rbegin()->first);
  long double total = 0;
  for (const auto& [j, v] : nodes) {
    out.ref(j) = v;
    total += v;
  }
  const double scale = f.mass / static_cast<double>(total);
  for (double& v : out.w) v *= scale;
  return out;
}

Kernel1D make_kernel(const TranslationFamily& f, double step) {
  Kernel1D k;
  if (const auto* fin = std::get_if<FiniteFamily>(&f)) {
    k.atoms = fin->atoms.atoms();
  } else if (const auto* pm = std::get_if<PointMassFamily>(&f)) {
    k.atoms = {{pm->location, pm->mass}};
  } else {
    k.runs = run_length(coverage_masses(std::get<UniformFamily>(f), step));
  }
  return k;
}

Kernel1D make_kernel(const GridDensity1D& h, double step) {
  if (std::abs(h.step - step) > 1e-12 * step) throw ArgumentError("kernel grid step mismatch");
  LatticeGrid m = from_density(h);
  for (double& v : m.w) {
    if (v < 0) throw ArgumentError("kernel density must be nonnegative");
    v *= step;
  }
  Kernel1D k;
  k.runs = run_length(m);
  return k;
}

LatticeGrid resample(const LatticeGrid& g, double a, bool deposit) {
  LatticeGrid out;
  if (g.empty()) return out;
  if (deposit) {
    for (std::size_t k = 0; k < g.w.size(); ++k) {
      const double t = a * static_cast<double>(g.first + static_cast<std::int64_t>(k));
      const double fl = std::floor(t);
      const auto i = static_cast<std::int64_t>(fl);
      const double f = t - fl;
      out.ensure(i, i + 1);
      out.ref(i) += (1 - f) * g.w[k];
      out.ref(i + 1) += f * g.w[k];
    }
    out.trim();
    return out;
  }
  const double alpha = 1 / std::abs(a);
  const double e0 = a * static_cast<double>(g.first - 1);
  const double e1 = a * static_cast<double>(g.last() + 1);
  const auto lo = static_cast<std::int64_t>(std::floor(std::min(e0, e1)));
  const auto hi = static_cast<std::int64_t>(std::ceil(std::max(e0, e1)));
  out.ensure(lo, hi);
  for (std::int64_t i = lo; i <= hi; ++i) out.ref(i) = alpha * g.interp(static_cast<double>(i) / a);
  out.trim();
  return out;
}

namespace {

void accumulate_runs(LatticeGrid& out, const std::vector<Run>& runs, const LatticeGrid& tmp) {
  if (runs.empty() || tmp.empty()) return;
  const std::size_t n = tmp.w.size();
  // Window sums are taken from whichever end is nearer, so tails keep their
  // relative accuracy and mirrored windows see identical float operations.
  std::vector<long double> P(n + 1, 0.0L), S(n + 1, 0.0L);
  for (std::size_t k = 0; k < n; ++k) P[k + 1] = P[k] + tmp.w[k];
  for (std::size_t k = n; k-- > 0;) S[k] = S[k + 1] + tmp.w[k];
  std::int64_t rlo = runs.front().lo, rhi = runs.front().hi;
  for (const auto& r : runs) {
    rlo = std::min(rlo, r.lo);
    rhi = std::max(rhi, r.hi);
  }
  const std::int64_t lo = tmp.first + rlo, hi = tmp.last() + rhi;
  out.ensure(lo, hi);
  const auto N = static_cast<std::int64_t>(n);
  for (std::int64_t i = lo; i <= hi; ++i) {
    long double v = 0;
    for (const auto& r : runs) {
      // tmp indices i - r.hi .. i - r.lo
      const std::int64_t p = std::clamp<std::int64_t>(i - r.hi - tmp.first, 0, N);
      const std::int64_t q = std::clamp<std::int64_t>(i - r.lo - tmp.first + 1, 0, N);
      if (q <= p) continue;
      const auto up = static_cast<std::size_t>(p), uq = static_cast<std::size_t>(q);
      v += r.w * (p + q <= N ? P[uq] - P[up] : S[up] - S[uq]);
    }
    out.ref(i) += static_cast<double>(v);
  }
}

void accumulate_atoms(LatticeGrid& out, const std::vector<Atom>& atoms, const LatticeGrid& g,
                      double a, double step, bool deposit) {
  if (g.empty()) return;
  const double alpha = 1 / std::abs(a);
  for (const auto& atom : atoms) {
    const double s = atom.x / step;
    if (deposit) {
      for (std::size_t k = 0; k < g.w.size(); ++k) {
        const double t = a * static_cast<double>(g.first + static_cast<std::int64_t>(k)) + s;
        const double fl = std::floor(t);
        const auto i = static_cast<std::int64_t>(fl);
        const double f = t - fl;
        out.ensure(i, i + 1);
        out.ref(i) += atom.w * (1 - f) * g.w[k];
        out.ref(i + 1) += atom.w * f * g.w[k];
      }
      continue;
    }
    const double e0 = s + a * static_cast<double>(g.first - 1);
    const double e1 = s + a * static_cast<double>(g.last() + 1);
    const auto lo = static_cast<std::int64_t>(std::floor(std::min(e0, e1)));
    const auto hi = static_cast<std::int64_t>(std::ceil(std::max(e0, e1)));
    out.ensure(lo, hi);
    for (std::int64_t i = lo; i <= hi; ++i)
      out.ref(i) += atom.w * alpha * g.interp((static_cast<double>(i) - s) / a);
  }
}

}  // namespace

void accumulate(LatticeGrid& out, const Kernel1D& k, const LatticeGrid& g, const LatticeGrid& tmp,
                double a, double step, bool deposit) {
  accumulate_runs(out, k.runs, tmp);
  accumulate_atoms(out, k.atoms, g, a, step, deposit);
}

std::vector<LatticeGrid> apply_operator(const EngineSystem& sys, const std::vector<LatticeGrid>& g,
                                        bool deposit) {
  const std::size_t n = sys.kernels.size();
  if (g.size() != n) throw ArgumentError("component count mismatch");
  std::vector<LatticeGrid> tmp(n);
  for (std::size_t j = 0; j < n; ++j) {
    bool used = false;
    for (std::size_t i = 0; i < n; ++i) used = used || (sys.kernels[i][j] && !sys.kernels[i][j]->runs.empty());
    if (used) tmp[j] = resample(g[j], sys.a, deposit);
  }
  std::vector<LatticeGrid> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (sys.kernels[i][j]) accumulate(out[i], *sys.kernels[i][j], g[j], tmp[j], sys.a, sys.step, deposit);
    out[i].trim();
  }
  return out;
}

EngineResult run_engine(const EngineSystem& sys, std::vector<LatticeGrid> seed, double tol,
                        int max_iter, int deposit_iterations) {
  if (!(tol > 0)) throw ArgumentError("tol must be positive");
  if (max_iter < 1) throw ArgumentError("max_iter must be positive");
  if (!(std::abs(sys.a) < 1) || sys.a == 0) throw ArgumentError("automorphism must be a contraction");
  EngineResult res;
  std::vector<LatticeGrid> cur = std::move(seed);
  for (int it = 1; it <= max_iter; ++it) {
    const bool deposit = it <= deposit_iterations;
    std::vector<LatticeGrid> next = apply_operator(sys, cur, deposit);
    double delta = 0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double m = next[i].sum() * sys.step;
      if (!(m > 0)) throw ArgumentError("component " + std::to_string(i + 1) + " lost all mass");
      const double scale = sys.masses[i] / m;
      for (double& v : next[i].w) v *= scale;
      delta = std::max(delta, l1(next[i], cur[i]) * sys.step);
    }
    res.deltas.push_back(delta);
    cur = std::move(next);
    if (!deposit && delta < tol) {
      res.g = std::move(cur);
      res.iterations = it;
      res.final_delta = delta;
      return res;
    }
  }
  throw NonConvergenceError("density iteration did not reach tolerance", max_iter,
                            res.deltas.back());
}

}  // namespace selfsim::detail
