#pragma once

// Cut and project sets over Z[sqrt2] (line) and Z[xi] (plane), the tile
// substitutions that generate them, maximal translation regions, densities
// and Weyl averages.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selfsim/compactsets.hpp"
#include "selfsim/measures.hpp"

namespace selfsim {

/// Lattice basis given as embedded rows (x, x*).
class CutProjectScheme {
 public:
  CutProjectScheme(RingKind kind, int physical_dim, int internal_dim, Eigen::MatrixXd basis);
  // Z[sqrt2] with x -> (x, x*), basis {1, sqrt2}.
  static CutProjectScheme silver();
  // Z[xi] with x -> (x, x*) in R^2 x R^2, basis {1, xi, xi^2, xi^3}.
  static CutProjectScheme ammann_beenker();

  RingKind kind() const { return kind_; }
  int physical_dim() const { return pdim_; }
  int internal_dim() const { return idim_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  // |det| of a square basis, sqrt of the Gram determinant otherwise.
  double covolume() const { return covol_; }

 private:
  RingKind kind_;
  int pdim_, idim_;
  Eigen::MatrixXd basis_;
  double covol_;
};

double covolume(const CutProjectScheme& s);
double theoretical_density(const CutProjectScheme& s, const CompactSet& window);
double theoretical_density(const CutProjectScheme& s, const ExactIntervalSet& window);

/// {x in Z[sqrt2] : |x| <= radius, x* in window}, sorted. Boundary
/// membership is decided exactly.
std::vector<QuadInt> project_points(const CutProjectScheme& s, const ExactIntervalSet& window, double radius);
std::vector<QuadInt> project_points(const CutProjectScheme& s, const IntervalSet& window, double radius);
/// {x in Z[xi] : |x| <= radius (Euclidean), x* in window}, sorted.
std::vector<CycloInt> project_points(const CutProjectScheme& s, const PolygonRegion& window, double radius);

/// Letters are 'a', 'b', ...; lengths exact in Z[sqrt2].
struct SubstitutionRule {
  std::vector<std::string> images;
  std::vector<QuadInt> lengths;
  QuadInt inflation;

  static SubstitutionRule silver();   // a -> aba, b -> a; lengths 1+sqrt2, 1
  static SubstitutionRule ternary();  // a -> ab, b -> abc, c -> abcc; lengths 1, 2, 3
  std::size_t alphabet() const { return images.size(); }
  // Throws ArgumentError unless Q len(t) = sum of the image lengths.
  void validate() const;
};

enum class Endpoint { left, right };

struct SubstitutionOrbit {
  std::string left_word;   // tiles ending at 0, read left to right
  std::string right_word;  // tiles starting at 0
  // points[t]: the chosen endpoint of every tile of letter t, sorted
  std::vector<std::vector<QuadInt>> points;
};

/// Iterates the substitution on the seed L|R. The seed is legal when the
/// image of R starts with R and the image of L ends with L.
SubstitutionOrbit substitution_orbit(const SubstitutionRule& rule, char left, char right, int generations,
                                     Endpoint endpoint = Endpoint::left);
/// Enough generations to cover [-radius, radius]; points clipped to it.
SubstitutionOrbit substitution_patch(const SubstitutionRule& rule, char left, char right, double radius,
                                     Endpoint endpoint = Endpoint::left);

struct CrosscheckReport {
  bool equal = false;
  std::size_t compared = 0;
  std::vector<QuadInt> only_first;
  std::vector<QuadInt> only_second;
};

/// Set comparison restricted to |x| <= radius.
CrosscheckReport crosscheck_modelset(const std::vector<QuadInt>& first, const std::vector<QuadInt>& second,
                                     double radius);

/// {b : A W_j + b inside W_i}, A = multiplication by a. May be empty.
IntervalSet maximal_translation_region(const IntervalSet& wi, const IntervalSet& wj, double a);
ExactIntervalSet maximal_translation_region(const ExactIntervalSet& wi, const ExactIntervalSet& wj,
                                            const QuadRat& a);
ConvexPolygon maximal_translation_region(const ConvexPolygon& wi, const ConvexPolygon& wj, double a);

/// Enumerated points with their star images and the radius they are
/// complete for.
struct Patch {
  std::vector<double> x;
  std::vector<double> star;
  double radius = 0;
};
Patch make_patch(const std::vector<QuadInt>& pts, double radius);

struct WeylRow {
  double radius;
  double center;
  double average;
  double limit;
  double abs_error;
};

/// (1/2r) sum over x in [c - r, c + r] of f(x*); ArgumentError when a ball
/// leaves the patch.
std::vector<WeylRow> weyl_average(const Patch& p, const std::function<double(double)>& f, double limit,
                                  const std::vector<double>& radii, const std::vector<double>& centers);
/// f = g by linear interpolation, limit mass(g) / covolume.
std::vector<WeylRow> weyl_average(const Patch& p, const GridDensity1D& g, const CutProjectScheme& s,
                                  const std::vector<double>& radii, const std::vector<double>& centers);
/// Counting density: f = 1, limit theta(window) / covolume.
std::vector<WeylRow> weyl_count(const Patch& p, double window_measure, const CutProjectScheme& s,
                                const std::vector<double>& radii, const std::vector<double>& centers);

// Delone constants of a sorted 1D point list.
double min_gap(const std::vector<QuadInt>& pts);
double max_gap(const std::vector<QuadInt>& pts);

void write_points_csv(std::ostream& os, const std::vector<std::vector<QuadInt>>& by_type);
void write_points_csv(std::ostream& os, const std::vector<CycloInt>& pts);
void write_weyl_csv(std::ostream& os, const std::vector<WeylRow>& rows);

}  // namespace selfsim
