#pragma once

// Exact arithmetic in Z[sqrt2], Q(sqrt2) and Z[xi] (xi a primitive 8th root
// of unity), with the Galois conjugations used as star maps and the real or
// planar embeddings on both sides of the cut and project scheme.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace selfsim {

using Point2 = Eigen::Vector2d;

inline constexpr double kSqrt2 = 1.41421356237309504880;

// Default cap on the number of coefficient tuples inspected by enumeration.
inline constexpr std::size_t kDefaultEnumerationCap = 50'000'000;

/// a + b*sqrt(2) with a, b in Z. Overflow of the 64-bit coefficients
/// raises ResourceError.
class QuadInt {
 public:
  constexpr QuadInt() = default;
  constexpr QuadInt(std::int64_t a, std::int64_t b = 0) : a_(a), b_(b) {}

  constexpr std::int64_t a() const { return a_; }
  constexpr std::int64_t b() const { return b_; }

  QuadInt operator-() const;
  QuadInt& operator+=(const QuadInt& o);
  QuadInt& operator-=(const QuadInt& o);
  QuadInt& operator*=(const QuadInt& o);

  friend QuadInt operator+(QuadInt x, const QuadInt& y) { return x += y; }
  friend QuadInt operator-(QuadInt x, const QuadInt& y) { return x -= y; }
  friend QuadInt operator*(QuadInt x, const QuadInt& y) { return x *= y; }
  friend bool operator==(const QuadInt&, const QuadInt&) = default;

  // Ordering by embedded real value, decided in integer arithmetic.
  friend std::strong_ordering operator<=>(const QuadInt& x, const QuadInt& y);

  // Field norm a^2 - 2 b^2 = embed(x) * embed_star(x).
  std::int64_t norm() const;
  // Sign of a + b sqrt2 without floating point.
  int sign() const;

 private:
  std::int64_t a_ = 0;
  std::int64_t b_ = 0;
};

QuadInt star(const QuadInt& x);
double embed(const QuadInt& x);
double embed_star(const QuadInt& x);
std::string to_string(const QuadInt& x);
std::ostream& operator<<(std::ostream& os, const QuadInt& x);

// Silver mean 1 + sqrt2 and its conjugate 1 - sqrt2.
inline constexpr QuadInt kSilver{1, 1};
inline constexpr QuadInt kSilverStar{1, -1};

/// (a + b sqrt2) / d in lowest terms with d > 0; equality is structural.
class QuadRat {
 public:
  QuadRat() = default;
  QuadRat(std::int64_t n) : num_(n, 0) {}  // NOLINT: integers embed
  QuadRat(const QuadInt& n) : num_(n) {}   // NOLINT
  QuadRat(const QuadInt& n, std::int64_t d);
  QuadRat(std::int64_t a, std::int64_t b, std::int64_t d)
      : QuadRat(QuadInt(a, b), d) {}

  const QuadInt& numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  QuadRat operator-() const;
  QuadRat& operator+=(const QuadRat& o);
  QuadRat& operator-=(const QuadRat& o);
  QuadRat& operator*=(const QuadRat& o);
  QuadRat& operator/=(const QuadRat& o);

  friend QuadRat operator+(QuadRat x, const QuadRat& y) { return x += y; }
  friend QuadRat operator-(QuadRat x, const QuadRat& y) { return x -= y; }
  friend QuadRat operator*(QuadRat x, const QuadRat& y) { return x *= y; }
  friend QuadRat operator/(QuadRat x, const QuadRat& y) { return x /= y; }
  friend bool operator==(const QuadRat&, const QuadRat&) = default;
  friend std::strong_ordering operator<=>(const QuadRat& x, const QuadRat& y);

  int sign() const { return num_.sign(); }
  double to_double() const;

 private:
  void canonicalize();

  QuadInt num_{};
  std::int64_t den_ = 1;
};

QuadRat star(const QuadRat& x);
QuadRat abs(const QuadRat& x);
double embed(const QuadRat& x);
double embed_star(const QuadRat& x);
std::string to_string(const QuadRat& x);
std::ostream& operator<<(std::ostream& os, const QuadRat& x);

/// sum_j c_j xi^j, j = 0..3, with xi^4 = -1.
class CycloInt {
 public:
  constexpr CycloInt() = default;
  constexpr CycloInt(std::int64_t c0, std::int64_t c1, std::int64_t c2, std::int64_t c3)
      : c_{c0, c1, c2, c3} {}

  std::int64_t operator[](std::size_t j) const { return c_[j]; }

  CycloInt operator-() const;
  CycloInt& operator+=(const CycloInt& o);
  CycloInt& operator-=(const CycloInt& o);
  CycloInt& operator*=(const CycloInt& o);

  friend CycloInt operator+(CycloInt x, const CycloInt& y) { return x += y; }
  friend CycloInt operator-(CycloInt x, const CycloInt& y) { return x -= y; }
  friend CycloInt operator*(CycloInt x, const CycloInt& y) { return x *= y; }
  friend bool operator==(const CycloInt&, const CycloInt&) = default;
  friend auto operator<=>(const CycloInt&, const CycloInt&) = default;

  // xi^k for any integer k.
  static CycloInt unit(int k);

 private:
  std::int64_t c_[4] = {0, 0, 0, 0};
};

// xi -> xi^3.
CycloInt star(const CycloInt& x);
// xi -> exp(i pi/4).
Point2 embed(const CycloInt& x);
// xi -> exp(3 i pi/4), i.e. embed(star(x)).
Point2 embed_star(const CycloInt& x);
std::string to_string(const CycloInt& x);

enum class RingKind { quadratic, cyclotomic };

/// All x in Z[sqrt2] with |x| <= physical_bound and |x*| <= star_bound.
/// Complete: the coefficient box is derived from both linear constraints.
std::vector<QuadInt> enumerate_quad_in_box(double physical_bound, double star_bound,
                                           std::size_t cap = kDefaultEnumerationCap);

/// All x in Z[xi] whose embedding and star embedding lie in the sup-norm
/// boxes of the given half widths.
std::vector<CycloInt> enumerate_cyclo_in_box(double physical_bound, double star_bound,
                                             std::size_t cap = kDefaultEnumerationCap);

}  // namespace selfsim

template <>
struct std::hash<selfsim::QuadInt> {
  std::size_t operator()(const selfsim::QuadInt& x) const noexcept {
    return std::hash<std::int64_t>{}(x.a()) * 1000003u ^ std::hash<std::int64_t>{}(x.b());
  }
};
