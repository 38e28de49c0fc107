#pragma once

// Multi-component self-similar measures on the line: the compatible mass
// vector, the matrix convolution fixed point, and the exact certificate for
// systems whose images tile the windows.

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selfsim/measures.hpp"

namespace selfsim {

inline constexpr double kCompatTol = 1e-10;

/// Positive m with s m = m, normalized to m[0] = 1. When the eigenvalue 1
/// is degenerate the all-ones vector is projected onto its eigenspace.
Eigen::VectorXd mass_vector(const Eigen::MatrixXd& s);

/// n components sharing x -> a x; sigma[i][j] absent means no maps j -> i.
class MCSystem {
 public:
  using Entry = std::optional<TranslationFamily>;

  // Throws CompatibilityError unless s m = m; m defaults to mass_vector(s).
  MCSystem(double a, std::vector<std::vector<Entry>> sigma,
           std::optional<Eigen::VectorXd> m = std::nullopt);

  std::size_t size() const { return sigma_.size(); }
  double a() const { return a_; }
  const Entry& sigma(std::size_t i, std::size_t j) const { return sigma_.at(i).at(j); }
  const Eigen::MatrixXd& s() const { return s_; }
  const Eigen::VectorXd& m() const { return m_; }

 private:
  double a_;
  std::vector<std::vector<Entry>> sigma_;
  Eigen::MatrixXd s_;
  Eigen::VectorXd m_;
};

struct MCDensity {
  std::vector<GridDensity1D> components;
  std::vector<double> masses;  // measured, step * sum of weights
  int iterations = 0;
  double final_delta = 0;
  std::vector<double> deltas;
};

/// Iterates omega <- sigma * A.omega on the lattice. Without seeds, the
/// start is m_i delta_0 as a one-node spike, and the first
/// max(2, deposit_iterations) steps transfer mass by deposit.
MCDensity solve_mc_density(const MCSystem& sys, const SolveOptions& opt,
                           const std::vector<GridDensity1D>* seeds = nullptr);

/// Sigma(k) Sigma(a k) ... Sigma(a^{n-1} k) m.
std::vector<std::complex<double>> mc_fourier_hat(const MCSystem& sys, double k, int n_terms);

/// Counting-measure system in exact arithmetic: component j enters i
/// through x -> a x + b for b in translations[i][j], sigma_ij carrying s[i][j].
struct ExactFiniteSystem {
  QuadRat a;
  std::vector<std::vector<std::vector<QuadRat>>> translations;
  std::vector<std::vector<QuadRat>> s;
  std::vector<QuadRat> m;
};

struct NonOverlapReport {
  bool no1 = false;  // finite translation sets
  bool no2 = false;  // m_i = theta(W_i)
  bool no3 = false;  // s_ij = |a| card F_ij
  bool no4 = false;  // images meet in measure zero
  bool covers = false;  // images fill W_i exactly
  bool holds = false;
  std::vector<std::string> failures;
  // Only when holds: indicator densities of W_i and the grid residual.
  std::vector<GridDensity1D> indicators;
  double identity_residual = 0;
};

NonOverlapReport verify_nonoverlap(const ExactFiniteSystem& sys, const std::vector<ExactIntervalSet>& windows,
                                   double grid_step = 1e-4);

/// max_i step * sum_x |1_{W_i}(x) - sum_j sum_b 1_{W_j}((x - b)/a)| over lattice
/// nodes covering the windows. Membership is evaluated pointwise.
double indicator_density_identity(const ExactFiniteSystem& sys, const std::vector<ExactIntervalSet>& windows,
                                  double grid_step);

/// Writes <stem>_<i>.csv per component and <stem>.json {n, masses, files, grid};
/// returns the manifest path.
std::filesystem::path write_mc_density(const std::filesystem::path& dir, const std::string& stem,
                                       const MCDensity& d);

}  // namespace selfsim
