#pragma once

// Self-similar measures for a single component: finite point-mass
// approximants, grid densities solved as convolution fixed points, the
// Kantorovich distance on the line and Fourier products.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "selfsim/compactsets.hpp"

namespace selfsim {

struct Atom {
  double x;
  double w;
};

inline constexpr double kAtomMergeTol = 1e-12;
inline constexpr std::size_t kDefaultAtomCap = 5'000'000;

/// Finite positive measure on R. Atoms are sorted and merged when closer
/// than kAtomMergeTol.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms);
  static DiscreteMeasure dirac(double x, double w = 1) { return DiscreteMeasure({{x, w}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const { return mass_; }

 private:
  std::vector<Atom> atoms_;
  double mass_ = 0;
};

/// Kantorovich-Rubinstein distance of two equal-mass measures on R,
/// computed as the integral of |F_mu - F_nu|.
double hutchinson_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Density sampled at nodes origin + k*step. mass() = step * sum(weights).
struct GridDensity1D {
  double origin = 0;
  double step = 1;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double x(std::size_t k) const { return origin + static_cast<double>(k) * step; }
  double mass() const;
  // Linear interpolation between nodes, zero outside the node range.
  double operator()(double x) const;
};

/// Row-major density: weights[iy * nx + ix] at origin + (ix, iy) * step.
struct GridDensity2D {
  Point2 origin = Point2::Zero();
  double step = 1;
  int nx = 0;
  int ny = 0;
  std::vector<double> weights;

  Point2 x(int ix, int iy) const { return origin + step * Point2(ix, iy); }
  double at(int ix, int iy) const { return weights[static_cast<std::size_t>(iy) * nx + ix]; }
  double mass() const;
  // Bilinear interpolation, zero outside the node range.
  double operator()(const Point2& p) const;
};

struct FiniteFamily {
  DiscreteMeasure atoms;
};
// Haar measure on region scaled to total mass `mass`.
struct UniformFamily {
  IntervalSet region;
  double mass = 1;
};
struct PointMassFamily {
  double location = 0;
  double mass = 1;
};
using TranslationFamily = std::variant<FiniteFamily, UniformFamily, PointMassFamily>;

struct UniformFamily2D {
  PolygonRegion region;
  double mass = 1;
};

double total_mass(const TranslationFamily& f);
// Fourier transform with the convention int exp(-2 pi i k x) d nu(x).
std::complex<double> fourier_transform(const TranslationFamily& f, double k);

DiscreteMeasure pushforward(const AffineMap1D& f, const DiscreteMeasure& m);
/// Maps the grid itself: nodes move with f, weights scale by the modulus.
GridDensity1D pushforward(const AffineMap1D& f, const GridDensity1D& g);

/// nu * (A.m) for x -> a x. Uniform families need a density argument.
DiscreteMeasure average_step(const TranslationFamily& nu, double a, const DiscreteMeasure& m);
/// One grid step g -> alpha (nu * g(A^-1 .)). Node images are deposited on
/// their two neighbours, so mass is conserved to rounding; the input grid
/// must be aligned (origin a multiple of step).
GridDensity1D average_step(const TranslationFamily& nu, double a, const GridDensity1D& g);

/// Truncated convolution nu * A.nu * ... * A^depth.nu.
DiscreteMeasure solve_invariant_atoms(const DiscreteMeasure& nu, double a, int depth,
                                      std::size_t cap = kDefaultAtomCap);

struct SolveOptions {
  double step = 1e-3;
  double tol = 1e-8;
  int max_iter = 500;
  // Number of initial iterations that push mass forward by deposit rather
  // than interpolation; needed when the seed is a spike.
  int deposit_iterations = 0;
};

struct DensityResult {
  GridDensity1D density;
  int iterations = 0;
  double final_delta = 0;
  std::vector<double> deltas;
  int analytic_iterations = 0;  // ceil(log(tol/diam)/log r)
};

/// Fixed point of g = alpha (nu * g(A^-1 .)) normalized to total_mass(nu),
/// iterated from g0 (or from the sampled family when g0 is empty).
DensityResult solve_density(const TranslationFamily& nu, double a, const SolveOptions& opt,
                            const GridDensity1D* g0 = nullptr);
/// Same fixed point for a kernel given directly as a grid density.
DensityResult solve_density(const GridDensity1D& h, double a, const SolveOptions& opt,
                            const GridDensity1D* g0 = nullptr);

/// Kernel weights (masses) of a family on the lattice step*Z, as a density.
/// Uniform regions use cell coverage with boundary overhang folded onto the
/// outermost node inside the region; the total mass is exact.
GridDensity1D sample_family(const UniformFamily& f, double step);

/// Residual ||g - alpha (nu * g(A^-1 .))||_1, without renormalization.
double fixed_point_residual(const TranslationFamily& nu, double a, const GridDensity1D& g);

/// L1 distance between two densities on the same lattice.
double l1_distance(const GridDensity1D& f, const GridDensity1D& g);
double l1_distance(const GridDensity2D& f, const GridDensity2D& g);

struct DensityResult2D {
  GridDensity2D density;
  int iterations = 0;
  double final_delta = 0;
  std::vector<double> deltas;
};

/// Planar fixed point for x -> A x with A = a * identity and a uniform
/// family on a convex region.
DensityResult2D solve_density_2d(const UniformFamily2D& nu, double a, const SolveOptions& opt);

/// prod_{l < n_terms} nu^(a^l k).
std::complex<double> fourier_hat(const TranslationFamily& nu, double a, double k, int n_terms);
/// step * sum g_j exp(-2 pi i k x_j).
std::complex<double> grid_fourier(const GridDensity1D& g, double k);

// CSV with header x,density (or x,y,density), 17 significant digits.
void write_csv(std::ostream& os, const GridDensity1D& g);
void write_csv(std::ostream& os, const GridDensity2D& g);
// {origin, step, counts, weights, mass}
std::string to_json(const GridDensity1D& g);
std::string to_json(const GridDensity2D& g);
GridDensity1D grid1d_from_json(const std::string& text);

std::string format_double(double x);

}  // namespace selfsim
