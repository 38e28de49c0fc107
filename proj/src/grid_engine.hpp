#pragma once

// Lattice convolution engine shared by the single and multi-component
// density solvers. Grids live on step*Z (step*Z^2) so the x -> -x symmetry of
// a family is preserved node for node.

#include <cstdint>
#include <optional>
#include <vector>

#include "selfsim/measures.hpp"

namespace selfsim::detail {

// Values at nodes (first + k) in grid units.
struct LatticeGrid {
  std::int64_t first = 0;
  std::vector<double> w;

  bool empty() const { return w.empty(); }
  std::int64_t last() const { return first + static_cast<std::int64_t>(w.size()) - 1; }
  double at(std::int64_t i) const {
    return (i < first || i > last()) ? 0.0 : w[static_cast<std::size_t>(i - first)];
  }
  // Linear interpolation at fractional grid coordinate t.
  double interp(double t) const;
  double sum() const;
  void trim();
  // Grow to cover [lo, hi] (zero filled).
  void ensure(std::int64_t lo, std::int64_t hi);
  double& ref(std::int64_t i) { return w[static_cast<std::size_t>(i - first)]; }
};

double l1(const LatticeGrid& f, const LatticeGrid& g);

LatticeGrid from_density(const GridDensity1D& g);
GridDensity1D to_density(const LatticeGrid& g, double step);

// Offsets lo..hi in grid units, each carrying mass w.
struct Run {
  std::int64_t lo;
  std::int64_t hi;
  double w;
};

struct Kernel1D {
  std::vector<Run> runs;    // lattice part
  std::vector<Atom> atoms;  // off-lattice point masses, physical positions
  double mass() const;
};

std::vector<Run> run_length(const LatticeGrid& masses);
LatticeGrid coverage_masses(const UniformFamily& f, double step);
Kernel1D make_kernel(const TranslationFamily& f, double step);
Kernel1D make_kernel(const GridDensity1D& h, double step);

// (A.g)(x) = alpha g(x / a) sampled on the lattice, by interpolation or by
// mass-conserving deposit of each node image.
LatticeGrid resample(const LatticeGrid& g, double a, bool deposit);

// out += kernel * (A.g); tmp must be resample(g, a, deposit).
void accumulate(LatticeGrid& out, const Kernel1D& k, const LatticeGrid& g,
                const LatticeGrid& tmp, double a, double step, bool deposit);

struct EngineSystem {
  double a = 0.5;
  double step = 1e-3;
  std::vector<std::vector<std::optional<Kernel1D>>> kernels;  // [i][j]
  std::vector<double> masses;                                 // renormalization targets
};

struct EngineResult {
  std::vector<LatticeGrid> g;
  int iterations = 0;
  double final_delta = 0;
  std::vector<double> deltas;
};

// One unnormalized application of the matrix operator.
std::vector<LatticeGrid> apply_operator(const EngineSystem& sys, const std::vector<LatticeGrid>& g,
                                        bool deposit);

EngineResult run_engine(const EngineSystem& sys, std::vector<LatticeGrid> seed, double tol,
                        int max_iter, int deposit_iterations);

}  // namespace selfsim::detail
