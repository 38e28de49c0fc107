#pragma once

// Truncated 3-adic integers: the three ternary windows as residue sets,
// exact coset densities on Z/3^K, and the invariant measure of the
// maximal ternary system.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace selfsim {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kDefaultPadicPrecision = 5;
inline constexpr int kMaxPadicPrecision = 12;

std::int64_t pow3(int k);

// Which residues mod 3^K stand for a window. `meeting` keeps every class
// that meets the window (cosets k = 2..K+1, the deepest one truncated); this
// is what direct evaluation mod 3^K gives. `contained` keeps only classes
// lying inside it (k = 2..K); its measure increases to 1/6.
enum class ResidueMode { meeting, contained };

/// Sorted residues mod 3^K for window i in {1, 2, 3}.
std::vector<std::int64_t> window_residues(int i, int K, ResidueMode mode = ResidueMode::meeting);

/// Haar measure of the realized residue set.
Rational window_measure(int i, int K, ResidueMode mode);

/// Membership of an integer in W_i decided at precision K: true inside a
/// contained class, false outside every meeting class, nullopt otherwise.
std::optional<bool> window_membership(int i, std::int64_t x, int K);

/// Integers x with |x| <= radius and x in W_i; throws ArgumentError when
/// precision K cannot decide some x.
std::vector<std::int64_t> ternary_model_set(int i, std::int64_t radius, int K);

/// Density on Z_3 constant on residue classes mod 3^K, w.r.t. normalized
/// Haar measure: mass = 3^-K * sum(weights).
class PadicDensity {
 public:
  explicit PadicDensity(int K);
  PadicDensity(int K, std::vector<Rational> weights);

  static PadicDensity uniform(int K);
  // Point mass at residue r: weight 3^K there.
  static PadicDensity spike(int K, std::int64_t r, const Rational& mass = 1);
  // Normalized indicator of a residue set, scaled to total mass `mass`.
  static PadicDensity indicator(int K, const std::vector<std::int64_t>& residues, const Rational& mass = 1);

  int precision() const { return K_; }
  std::int64_t modulus() const { return static_cast<std::int64_t>(w_.size()); }
  const std::vector<Rational>& weights() const { return w_; }
  const Rational& operator[](std::int64_t r) const { return w_.at(static_cast<std::size_t>(r)); }
  Rational mass() const;
  std::vector<std::int64_t> support() const;

  friend bool operator==(const PadicDensity&, const PadicDensity&) = default;

 private:
  int K_;
  std::vector<Rational> w_;
};

/// Group convolution on Z/3^K.
PadicDensity padic_convolve(const PadicDensity& u, const PadicDensity& v);
/// Pushforward by x -> 3x.
PadicDensity padic_scale(const PadicDensity& u);

/// {b mod 3^K : 3 * meeting(W_j, K-1) + b is inside contained(W_i, K)}.
std::vector<std::int64_t> padic_maximal_family(int i, int j, int K);

struct PadicSolution {
  int precision = kDefaultPadicPrecision;
  std::array<std::array<Rational, 3>, 3> s;
  std::array<Rational, 3> m;
  std::array<std::array<std::vector<std::int64_t>, 3>, 3> families;
  std::vector<PadicDensity> omega;
  int iterations = 0;  // until an iteration changed nothing
};

/// omega <- sigma * (3.omega) from m_i delta_0, sigma_ij the normalized
/// indicator of F_ij with mass s_ij, s the ternary count matrix / 3.
PadicSolution solve_padic_system(int K = kDefaultPadicPrecision, int max_iter = 50);

/// 9 m_i on residues = c_i mod 9, (c_1, c_2, c_3) = (1, 3, 0).
std::vector<PadicDensity> padic_closed_form(int K, const std::array<Rational, 3>& m);

void write_padic_csv(std::ostream& os, const PadicDensity& d);
std::string padic_to_json(const PadicSolution& sol);

}  // namespace selfsim
