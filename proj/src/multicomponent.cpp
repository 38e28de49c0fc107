#include "selfsim/multicomponent.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/SVD>
#include "json.hpp"

#include "grid_engine.hpp"

namespace selfsim {

Eigen::VectorXd mass_vector(const Eigen::MatrixXd& s) {
  const auto n = s.rows();
  if (n == 0 || s.cols() != n) throw ArgumentError("mass matrix must be square and nonempty");
  if ((s.array() < 0).any() || !s.allFinite()) throw ArgumentError("mass matrix must be nonnegative");
  const Eigen::MatrixXd d = s - Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<Eigen::Index> null;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) <= cut) null.push_back(k);
  if (null.empty()) throw CompatibilityError("s has no eigenvalue 1, condition s m = m cannot hold");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (auto k : null) {
    const Eigen::VectorXd q = svd.matrixV().col(k);
    v += q.dot(ones) * q;
  }
  if (!(v.minCoeff() > 1e-12 * v.cwiseAbs().maxCoeff())) {
    // a single eigenvector orthogonal to ones can still be positive up to sign
    if (null.size() == 1) {
      v = svd.matrixV().col(null[0]);
      if (v(0) < 0) v = -v;
    }
  }
  if (!(v.minCoeff() > 0)) throw CompatibilityError("no strictly positive eigenvector for eigenvalue 1");
  v /= v(0);
  if ((s * v - v).cwiseAbs().maxCoeff() > kCompatTol)
    throw CompatibilityError("eigenvector residual exceeds tolerance");
  return v;
}

MCSystem::MCSystem(double a, std::vector<std::vector<Entry>> sigma, std::optional<Eigen::VectorXd> m)
    : a_(a), sigma_(std::move(sigma)) {
  const std::size_t n = sigma_.size();
  if (n == 0) throw ArgumentError("system without components");
  if (!(std::abs(a) < 1) || a == 0) throw ArgumentError("automorphism must be a contraction");
  s_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma_[i].size() != n) throw ArgumentError("sigma must be a square matrix");
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!sigma_[i][j]) continue;
      const double w = total_mass(*sigma_[i][j]);
      if (!(w > 0)) throw ArgumentError("present sigma entries need positive mass");
      s_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
      any = true;
    }
    if (!any) throw ArgumentError("component " + std::to_string(i + 1) + " receives no mass");
  }
  if (m) {
    if (m->size() != static_cast<Eigen::Index>(n)) throw ArgumentError("mass vector length mismatch");
    if (!(m->minCoeff() > 0)) throw ArgumentError("masses must be positive");
    if ((s_ * *m - *m).cwiseAbs().maxCoeff() > kCompatTol)
      throw CompatibilityError("s m = m fails for the given mass vector");
    m_ = *m;
  } else {
    m_ = mass_vector(s_);
  }
}

MCDensity solve_mc_density(const MCSystem& sys, const SolveOptions& opt,
                           const std::vector<GridDensity1D>* seeds) {
  if (!(opt.step > 0) || !std::isfinite(opt.step)) throw ArgumentError("grid step must be positive");
  const std::size_t n = sys.size();
  detail::EngineSystem es;
  es.a = sys.a();
  es.step = opt.step;
  es.kernels.assign(n, std::vector<std::optional<detail::Kernel1D>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    es.masses.push_back(sys.m()(static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < n; ++j)
      if (sys.sigma(i, j)) es.kernels[i][j] = detail::make_kernel(*sys.sigma(i, j), opt.step);
  }
  std::vector<detail::LatticeGrid> start;
  int deposit = opt.deposit_iterations;
  if (seeds) {
    if (seeds->size() != n) throw ArgumentError("one seed per component required");
    for (const auto& g : *seeds) {
      if (std::abs(g.step - opt.step) > 1e-12 * opt.step) throw ArgumentError("seed grid step mismatch");
      start.push_back(detail::from_density(g));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) start.push_back({0, {es.masses[i] / opt.step}});
    deposit = std::max(deposit, 2);
  }
  const auto r = detail::run_engine(es, std::move(start), opt.tol, opt.max_iter, deposit);
  MCDensity out;
  for (const auto& g : r.g) {
    out.components.push_back(detail::to_density(g, opt.step));
    out.masses.push_back(out.components.back().mass());
  }
  out.iterations = r.iterations;
  out.final_delta = r.final_delta;
  out.deltas = r.deltas;
  return out;
}

std::vector<std::complex<double>> mc_fourier_hat(const MCSystem& sys, double k, int n_terms) {
  if (n_terms < 1) throw ArgumentError("n_terms must be at least 1");
  const auto n = static_cast<Eigen::Index>(sys.size());
  Eigen::VectorXcd v = sys.m().cast<std::complex<double>>();
  for (int l = n_terms - 1; l >= 0; --l) {
    const double kk = k * std::pow(sys.a(), l);
    Eigen::MatrixXcd sig = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (const auto& e = sys.sigma(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
          sig(i, j) = fourier_transform(*e, kk);
    v = sig * v;
  }
  return {v.data(), v.data() + v.size()};
}

namespace {

bool shape_ok(const ExactFiniteSystem& sys, std::size_t n) {
  if (sys.translations.size() != n || sys.s.size() != n || sys.m.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (sys.translations[i].size() != n || sys.s[i].size() != n) return false;
  return true;
}

}  // namespace

NonOverlapReport verify_nonoverlap(const ExactFiniteSystem& sys, const std::vector<ExactIntervalSet>& windows,
                                   double grid_step) {
  const std::size_t n = windows.size();
  if (n == 0 || !shape_ok(sys, n)) throw ArgumentError("system and windows disagree in size");
  NonOverlapReport rep;
  rep.no1 = true;  // translation lists are finite by construction
  const QuadRat absa = abs(sys.a);

  rep.no2 = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!(sys.m[i] == windows[i].measure())) {
      rep.no2 = false;
      rep.failures.push_back("NO2: m_" + std::to_string(i + 1) + " = " + to_string(sys.m[i]) +
                             " but theta(W) = " + to_string(windows[i].measure()));
    }

  rep.no3 = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const QuadRat want = absa * QuadRat(static_cast<std::int64_t>(sys.translations[i][j].size()));
      if (!(sys.s[i][j] == want)) {
        rep.no3 = false;
        rep.failures.push_back("NO3: s_" + std::to_string(i + 1) + std::to_string(j + 1) + " = " +
                               to_string(sys.s[i][j]) + ", expected " + to_string(want));
      }
    }

  rep.no4 = true;
  rep.covers = true;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ExactIntervalSet> images;
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& b : sys.translations[i][j]) images.push_back(apply_affine(ExactAffineMap1D{sys.a, b}, windows[j]));
    ExactIntervalSet all;
    for (std::size_t p = 0; p < images.size(); ++p) {
      all.unite(images[p]);
      for (std::size_t q = p + 1; q < images.size(); ++q)
        if (!(intersect(images[p], images[q]).measure() == QuadRat(0))) {
          rep.no4 = false;
          rep.failures.push_back("NO4: images " + std::to_string(p + 1) + " and " + std::to_string(q + 1) +
                                 " inside W_" + std::to_string(i + 1) + " overlap");
        }
    }
    if (!(all == windows[i])) {
      rep.covers = false;
      rep.failures.push_back("images do not tile W_" + std::to_string(i + 1));
    }
  }
  rep.holds = rep.no1 && rep.no2 && rep.no3 && rep.no4 && rep.covers;
  if (rep.holds) {
    for (const auto& w : windows) {
      const IntervalSet wd = to_double(w);
      GridDensity1D g;
      g.step = grid_step;
      const auto lo = static_cast<std::int64_t>(std::floor(wd.min() / grid_step));
      const auto hi = static_cast<std::int64_t>(std::ceil(wd.max() / grid_step));
      g.origin = static_cast<double>(lo) * grid_step;
      for (auto k = lo; k <= hi; ++k) g.weights.push_back(wd.contains(static_cast<double>(k) * grid_step) ? 1.0 : 0.0);
      rep.indicators.push_back(std::move(g));
    }
    rep.identity_residual = indicator_density_identity(sys, windows, grid_step);
  }
  return rep;
}

double indicator_density_identity(const ExactFiniteSystem& sys, const std::vector<ExactIntervalSet>& windows,
                                  double grid_step) {
  const std::size_t n = windows.size();
  if (n == 0 || !shape_ok(sys, n)) throw ArgumentError("system and windows disagree in size");
  if (!(grid_step > 0)) throw ArgumentError("grid step must be positive");
  std::vector<IntervalSet> w;
  double lo = 0, hi = 0;
  for (const auto& x : windows) {
    w.push_back(to_double(x));
    if (w.back().empty()) throw ArgumentError("empty window");
    lo = std::min(lo, w.back().min());
    hi = std::max(hi, w.back().max());
  }
  const double a = sys.a.to_double();
  const auto k0 = static_cast<std::int64_t>(std::floor(lo / grid_step)) - 2;
  const auto k1 = static_cast<std::int64_t>(std::ceil(hi / grid_step)) + 2;
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> shifts;
    std::vector<std::size_t> from;
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& b : sys.translations[i][j]) {
        shifts.push_back(b.to_double());
        from.push_back(j);
      }
    long double r = 0;
    for (auto k = k0; k <= k1; ++k) {
      const double x = static_cast<double>(k) * grid_step;
      int rhs = 0;
      for (std::size_t t = 0; t < shifts.size(); ++t) rhs += w[from[t]].contains((x - shifts[t]) / a) ? 1 : 0;
      r += std::abs((w[i].contains(x) ? 1 : 0) - rhs);
    }
    worst = std::max(worst, static_cast<double>(r) * grid_step);
  }
  return worst;
}

std::filesystem::path write_mc_density(const std::filesystem::path& dir, const std::string& stem,
                                       const MCDensity& d) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json files = nlohmann::ordered_json::array(), origins = files, counts = files;
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const std::string name = stem + "_" + std::to_string(i + 1) + ".csv";
    std::ofstream os(dir / name);
    if (!os) throw ResourceError("cannot write " + (dir / name).string());
    write_csv(os, d.components[i]);
    files.push_back(name);
    origins.push_back(d.components[i].origin);
    counts.push_back(d.components[i].size());
  }
  nlohmann::ordered_json j;
  j["n"] = d.components.size();
  j["masses"] = d.masses;
  j["files"] = files;
  j["grid"] = {{"step", d.components.empty() ? 0.0 : d.components[0].step}, {"origins", origins}, {"counts", counts}};
  j["iterations"] = d.iterations;
  const auto path = dir / (stem + ".json");
  std::ofstream os(path);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  return path;
}

}  // namespace selfsim
