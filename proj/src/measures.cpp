#include "selfsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "grid_engine.hpp"
#include "json.hpp"

namespace selfsim {

using detail::LatticeGrid;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- DiscreteMeasure -------------------------------------------------------

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  long double mass = 0;
  for (const auto& a : atoms) {
    if (!(a.w >= 0) || !std::isfinite(a.x)) throw ArgumentError("atom weights must be nonnegative");
    if (a.w == 0) continue;
    mass += a.w;
    if (!atoms_.empty() && a.x - atoms_.back().x <= kAtomMergeTol) {
      Atom& b = atoms_.back();
      const double w = b.w + a.w;
      b.x = (b.x * b.w + a.x * a.w) / w;
      b.w = w;
    } else {
      atoms_.push_back(a);
    }
  }
  mass_ = static_cast<double>(mass);
}

double hutchinson_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (std::abs(mu.total_mass() - nu.total_mass()) > 1e-9)
    throw ArgumentError("Hutchinson distance needs equal total masses");
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  std::size_t i = 0, j = 0;
  long double diff = 0, dist = 0;
  double prev = 0;
  bool started = false;
  while (i < a.size() || j < b.size()) {
    const double x = (j == b.size() || (i < a.size() && a[i].x <= b[j].x)) ? a[i].x : b[j].x;
    if (started) dist += std::abs(diff) * (x - prev);
    while (i < a.size() && a[i].x == x) diff += a[i++].w;
    while (j < b.size() && b[j].x == x) diff -= b[j++].w;
    prev = x;
    started = true;
  }
  return static_cast<double>(dist);
}

// ---- grids -----------------------------------------------------------------

double GridDensity1D::mass() const {
  long double s = 0;
  for (double v : weights) s += v;
  return static_cast<double>(s) * step;
}

double GridDensity1D::operator()(double x) const {
  if (weights.empty()) return 0;
  const double t = (x - origin) / step;
  const double fl = std::floor(t);
  const auto i = static_cast<std::int64_t>(fl);
  const double f = t - fl;
  auto at = [&](std::int64_t k) {
    return (k < 0 || k >= static_cast<std::int64_t>(weights.size())) ? 0.0
                                                                      : weights[static_cast<std::size_t>(k)];
  };
  return f == 0 ? at(i) : (1 - f) * at(i) + f * at(i + 1);
}

double GridDensity2D::mass() const {
  long double s = 0;
  for (double v : weights) s += v;
  return static_cast<double>(s) * step * step;
}

double GridDensity2D::operator()(const Point2& p) const {
  const Point2 t = (p - origin) / step;
  const double fx = std::floor(t.x()), fy = std::floor(t.y());
  const auto ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  const double u = t.x() - fx, v = t.y() - fy;
  auto g = [&](int x, int y) { return (x < 0 || y < 0 || x >= nx || y >= ny) ? 0.0 : at(x, y); };
  return (1 - u) * (1 - v) * g(ix, iy) + u * (1 - v) * g(ix + 1, iy) + (1 - u) * v * g(ix, iy + 1) +
         u * v * g(ix + 1, iy + 1);
}

// ---- families --------------------------------------------------------------

double total_mass(const TranslationFamily& f) {
  if (const auto* a = std::get_if<FiniteFamily>(&f)) return a->atoms.total_mass();
  if (const auto* b = std::get_if<PointMassFamily>(&f)) return b->mass;
  return std::get<UniformFamily>(f).mass;
}

std::complex<double> fourier_transform(const TranslationFamily& f, double k) {
  const double tau = 2 * M_PI;
  auto phase = [&](double x) { return std::polar(1.0, -tau * k * x); };
  if (const auto* a = std::get_if<FiniteFamily>(&f)) {
    std::complex<double> s = 0;
    for (const auto& at : a->atoms.atoms()) s += at.w * phase(at.x);
    return s;
  }
  if (const auto* b = std::get_if<PointMassFamily>(&f)) return b->mass * phase(b->location);
  const auto& u = std::get<UniformFamily>(f);
  const double rho = u.mass / u.region.measure();
  std::complex<double> s = 0;
  for (const auto& p : u.region.intervals()) {
    const double c = 0.5 * (p.lo + p.hi), r = 0.5 * (p.hi - p.lo);
    const double z = tau * k * r;
    const double sinc = z == 0 ? 1.0 : std::sin(z) / z;
    s += rho * 2 * r * sinc * phase(c);
  }
  return s;
}

DiscreteMeasure pushforward(const AffineMap1D& f, const DiscreteMeasure& m) {
  std::vector<Atom> out;
  for (const auto& a : m.atoms()) out.push_back({f(a.x), a.w});
  return DiscreteMeasure(std::move(out));
}

GridDensity1D pushforward(const AffineMap1D& f, const GridDensity1D& g) {
  if (f.a == 0) throw ArgumentError("pushforward by a singular map");
  GridDensity1D out;
  out.step = std::abs(f.a) * g.step;
  const double alpha = f.modulus();
  out.weights.resize(g.size());
  if (f.a > 0) {
    out.origin = f(g.origin);
    for (std::size_t k = 0; k < g.size(); ++k) out.weights[k] = alpha * g.weights[k];
  } else {
    out.origin = g.size() ? f(g.x(g.size() - 1)) : f(g.origin);
    for (std::size_t k = 0; k < g.size(); ++k) out.weights[k] = alpha * g.weights[g.size() - 1 - k];
  }
  return out;
}

DiscreteMeasure average_step(const TranslationFamily& nu, double a, const DiscreteMeasure& m) {
  std::vector<Atom> shifts;
  if (const auto* f = std::get_if<FiniteFamily>(&nu)) {
    shifts = f->atoms.atoms();
  } else if (const auto* p = std::get_if<PointMassFamily>(&nu)) {
    shifts = {{p->location, p->mass}};
  } else {
    throw ArgumentError("a uniform family does not map point masses to point masses");
  }
  std::vector<Atom> out;
  out.reserve(shifts.size() * m.size());
  for (const auto& t : shifts)
    for (const auto& x : m.atoms()) out.push_back({a * x.x + t.x, t.w * x.w});
  return DiscreteMeasure(std::move(out));
}

namespace {

detail::EngineSystem single(const detail::Kernel1D& k, double a, double step, double mass) {
  detail::EngineSystem sys;
  sys.a = a;
  sys.step = step;
  sys.kernels = {{k}};
  sys.masses = {mass};
  return sys;
}

void require_step(double step) {
  if (!(step > 0) || !std::isfinite(step)) throw ArgumentError("grid step must be positive");
}

void require_contraction(double a) {
  if (!(std::abs(a) < 1) || a == 0) throw ArgumentError("automorphism must be a contraction");
}

}  // namespace

GridDensity1D average_step(const TranslationFamily& nu, double a, const GridDensity1D& g) {
  require_contraction(a);
  const auto sys = single(detail::make_kernel(nu, g.step), a, g.step, 1);
  auto out = detail::apply_operator(sys, {detail::from_density(g)}, true);
  return detail::to_density(out[0], g.step);
}

DiscreteMeasure solve_invariant_atoms(const DiscreteMeasure& nu, double a, int depth,
                                      std::size_t cap) {
  if (depth < 1) throw ArgumentError("depth must be at least 1");
  require_contraction(a);
  DiscreteMeasure cur = nu;
  double scale = 1;
  for (int l = 1; l <= depth; ++l) {
    scale *= a;
    if (cur.size() * nu.size() > cap) throw ResourceError("atom count exceeds cap");
    std::vector<Atom> out;
    out.reserve(cur.size() * nu.size());
    for (const auto& x : cur.atoms())
      for (const auto& t : nu.atoms()) out.push_back({x.x + scale * t.x, x.w * t.w});
    cur = DiscreteMeasure(std::move(out));
  }
  return cur;
}

GridDensity1D sample_family(const UniformFamily& f, double step) {
  require_step(step);
  LatticeGrid m = detail::coverage_masses(f, step);
  for (double& v : m.w) v /= step;
  return detail::to_density(m, step);
}

namespace {

int analytic_bound(double tol, double diam, double r) {
  if (!(diam > 0) || !(r > 0) || r >= 1) return 0;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol / diam) / std::log(r))));
}

DensityResult solve_with_kernel(const detail::Kernel1D& k, double a, const SolveOptions& opt,
                                const GridDensity1D* g0, const GridDensity1D& seed_default) {
  const double mass = k.mass();
  if (std::abs(mass - 1) > 1e-9) throw ArgumentError("family must be a probability measure");
  const auto sys = single(k, a, opt.step, 1);
  LatticeGrid seed = detail::from_density(g0 ? *g0 : seed_default);
  if (g0 && std::abs(g0->step - opt.step) > 1e-12 * opt.step) throw ArgumentError("seed grid step mismatch");
  const auto r = detail::run_engine(sys, {seed}, opt.tol, opt.max_iter, opt.deposit_iterations);
  DensityResult out;
  out.density = detail::to_density(r.g[0], opt.step);
  out.iterations = r.iterations;
  out.final_delta = r.final_delta;
  out.deltas = r.deltas;
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto& run : k.runs) {
    lo = any ? std::min(lo, run.lo * opt.step) : run.lo * opt.step;
    hi = any ? std::max(hi, run.hi * opt.step) : run.hi * opt.step;
    any = true;
  }
  out.analytic_iterations = analytic_bound(opt.tol, (hi - lo) / (1 - std::abs(a)), std::abs(a));
  return out;
}

}  // namespace

DensityResult solve_density(const TranslationFamily& nu, double a, const SolveOptions& opt,
                            const GridDensity1D* g0) {
  require_step(opt.step);
  require_contraction(a);
  const auto* u = std::get_if<UniformFamily>(&nu);
  if (!u) throw ArgumentError("a density solve needs a uniform (absolutely continuous) family");
  return solve_with_kernel(detail::make_kernel(nu, opt.step), a, opt, g0, sample_family(*u, opt.step));
}

DensityResult solve_density(const GridDensity1D& h, double a, const SolveOptions& opt,
                            const GridDensity1D* g0) {
  require_step(opt.step);
  require_contraction(a);
  return solve_with_kernel(detail::make_kernel(h, opt.step), a, opt, g0, h);
}

double fixed_point_residual(const TranslationFamily& nu, double a, const GridDensity1D& g) {
  require_contraction(a);
  const auto sys = single(detail::make_kernel(nu, g.step), a, g.step, 1);
  const LatticeGrid lg = detail::from_density(g);
  const auto out = detail::apply_operator(sys, {lg}, false);
  return detail::l1(out[0], lg) * g.step;
}

double l1_distance(const GridDensity1D& f, const GridDensity1D& g) {
  if (std::abs(f.step - g.step) > 1e-12 * f.step) throw ArgumentError("grid step mismatch");
  return detail::l1(detail::from_density(f), detail::from_density(g)) * f.step;
}

double l1_distance(const GridDensity2D& f, const GridDensity2D& g) {
  if (std::abs(f.step - g.step) > 1e-12 * f.step) throw ArgumentError("grid step mismatch");
  const auto fx = static_cast<int>(std::lround(f.origin.x() / f.step));
  const auto fy = static_cast<int>(std::lround(f.origin.y() / f.step));
  const auto gx = static_cast<int>(std::lround(g.origin.x() / g.step));
  const auto gy = static_cast<int>(std::lround(g.origin.y() / g.step));
  const int x0 = std::min(fx, gx), y0 = std::min(fy, gy);
  const int x1 = std::max(fx + f.nx, gx + g.nx), y1 = std::max(fy + f.ny, gy + g.ny);
  auto val = [](const GridDensity2D& d, int ox, int oy, int x, int y) {
    x -= ox;
    y -= oy;
    return (x < 0 || y < 0 || x >= d.nx || y >= d.ny) ? 0.0 : d.at(x, y);
  };
  long double s = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) s += std::abs(val(f, fx, fy, x, y) - val(g, gx, gy, x, y));
  return static_cast<double>(s) * f.step * f.step;
}

std::complex<double> fourier_hat(const TranslationFamily& nu, double a, double k, int n_terms) {
  if (n_terms < 1) throw ArgumentError("n_terms must be at least 1");
  std::complex<double> p = 1;
  double kk = k;
  for (int l = 0; l < n_terms; ++l) {
    p *= fourier_transform(nu, kk);
    kk *= a;
  }
  return p;
}

std::complex<double> grid_fourier(const GridDensity1D& g, double k) {
  long double re = 0, im = 0;
  const long double tau = 2 * 3.141592653589793238462643383279502884L;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const long double ph = -tau * k * static_cast<long double>(g.x(j));
    re += g.weights[j] * std::cos(ph);
    im += g.weights[j] * std::sin(ph);
  }
  return {static_cast<double>(re * g.step), static_cast<double>(im * g.step)};
}

// ---- serialization ---------------------------------------------------------

void write_csv(std::ostream& os, const GridDensity1D& g) {
  os << "x,density\n";
  for (std::size_t k = 0; k < g.size(); ++k)
    os << format_double(g.x(k)) << ',' << format_double(g.weights[k]) << '\n';
}

void write_csv(std::ostream& os, const GridDensity2D& g) {
  os << "x,y,density\n";
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point2 p = g.x(ix, iy);
      os << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(g.at(ix, iy))
         << '\n';
    }
}

std::string to_json(const GridDensity1D& g) {
  nlohmann::ordered_json j;
  j["origin"] = g.origin;
  j["step"] = g.step;
  j["counts"] = {g.size()};
  j["weights"] = g.weights;
  j["mass"] = g.mass();
  return j.dump();
}

std::string to_json(const GridDensity2D& g) {
  nlohmann::ordered_json j;
  j["origin"] = {g.origin.x(), g.origin.y()};
  j["step"] = g.step;
  j["counts"] = {g.nx, g.ny};
  j["weights"] = g.weights;
  j["mass"] = g.mass();
  return j.dump();
}

GridDensity1D grid1d_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GridDensity1D g;
    g.origin = j.at("origin").get<double>();
    g.step = j.at("step").get<double>();
    g.weights = j.at("weights").get<std::vector<double>>();
    if (j.at("counts").at(0).get<std::size_t>() != g.weights.size())
      throw ArgumentError("counts do not match weights");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed grid density JSON: ") + e.what());
  }
}

}  // namespace selfsim
