#include "selfsim/numberfields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "selfsim/errors.hpp"

namespace selfsim {
namespace {

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw ResourceError("integer overflow in exact arithmetic");
  return r;
}

std::int64_t checked_sub(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_sub_overflow(x, y, &r)) throw ResourceError("integer overflow in exact arithmetic");
  return r;
}

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw ResourceError("integer overflow in exact arithmetic");
  return r;
}

std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw ResourceError("integer overflow in exact arithmetic");
  return static_cast<std::int64_t>(v);
}

std::int64_t gcd3(std::int64_t a, std::int64_t b, std::int64_t c) {
  return std::gcd(std::gcd(a, b), c);
}

}  // namespace

// ---- QuadInt ---------------------------------------------------------------

QuadInt QuadInt::operator-() const { return {checked_sub(0, a_), checked_sub(0, b_)}; }

QuadInt& QuadInt::operator+=(const QuadInt& o) {
  a_ = checked_add(a_, o.a_);
  b_ = checked_add(b_, o.b_);
  return *this;
}

QuadInt& QuadInt::operator-=(const QuadInt& o) {
  a_ = checked_sub(a_, o.a_);
  b_ = checked_sub(b_, o.b_);
  return *this;
}

QuadInt& QuadInt::operator*=(const QuadInt& o) {
  const __int128 a = static_cast<__int128>(a_) * o.a_ + 2 * static_cast<__int128>(b_) * o.b_;
  const __int128 b = static_cast<__int128>(a_) * o.b_ + static_cast<__int128>(b_) * o.a_;
  a_ = narrow(a);
  b_ = narrow(b);
  return *this;
}

std::int64_t QuadInt::norm() const {
  return narrow(static_cast<__int128>(a_) * a_ - 2 * static_cast<__int128>(b_) * b_);
}

int QuadInt::sign() const {
  if (a_ >= 0 && b_ >= 0) return (a_ > 0 || b_ > 0) ? 1 : 0;
  if (a_ <= 0 && b_ <= 0) return -1;
  // Mixed signs: compare a^2 with 2 b^2; equality would make sqrt2 rational.
  const __int128 aa = static_cast<__int128>(a_) * a_;
  const __int128 bb = 2 * static_cast<__int128>(b_) * b_;
  if (a_ > 0) return aa > bb ? 1 : -1;
  return bb > aa ? 1 : -1;
}

std::strong_ordering operator<=>(const QuadInt& x, const QuadInt& y) {
  const int s = (x - y).sign();
  return s < 0 ? std::strong_ordering::less
               : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

QuadInt star(const QuadInt& x) { return {x.a(), checked_sub(0, x.b())}; }

double embed(const QuadInt& x) {
  return static_cast<double>(static_cast<long double>(x.a()) +
                             static_cast<long double>(x.b()) * 1.41421356237309504880L);
}

double embed_star(const QuadInt& x) { return embed(star(x)); }

std::string to_string(const QuadInt& x) {
  std::ostringstream os;
  os << x.a() << (x.b() < 0 ? "-" : "+") << (x.b() < 0 ? -x.b() : x.b()) << "*sqrt2";
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const QuadInt& x) { return os << to_string(x); }

// ---- QuadRat ---------------------------------------------------------------

QuadRat::QuadRat(const QuadInt& n, std::int64_t d) : num_(n), den_(d) {
  if (d == 0) throw ArgumentError("QuadRat with zero denominator");
  canonicalize();
}

void QuadRat::canonicalize() {
  if (den_ < 0) {
    num_ = -num_;
    den_ = checked_sub(0, den_);
  }
  const std::int64_t g = gcd3(num_.a(), num_.b(), den_);
  if (g > 1) {
    num_ = QuadInt(num_.a() / g, num_.b() / g);
    den_ /= g;
  }
}

QuadRat QuadRat::operator-() const { return QuadRat(-num_, den_); }

QuadRat& QuadRat::operator+=(const QuadRat& o) {
  const std::int64_t g = std::gcd(den_, o.den_);
  const std::int64_t l = den_ / g;
  const std::int64_t r = o.den_ / g;
  num_ = num_ * QuadInt(r) + o.num_ * QuadInt(l);
  den_ = checked_mul(den_, r);
  canonicalize();
  return *this;
}

QuadRat& QuadRat::operator-=(const QuadRat& o) { return *this += -o; }

QuadRat& QuadRat::operator*=(const QuadRat& o) {
  num_ *= o.num_;
  den_ = checked_mul(den_, o.den_);
  canonicalize();
  return *this;
}

QuadRat& QuadRat::operator/=(const QuadRat& o) {
  if (o.num_ == QuadInt{}) throw ArgumentError("division by zero in Q(sqrt2)");
  // 1/(a + b sqrt2) = (a - b sqrt2) / (a^2 - 2 b^2)
  const std::int64_t n = o.num_.norm();
  num_ = num_ * star(o.num_) * QuadInt(o.den_);
  den_ = checked_mul(den_, n);
  canonicalize();
  return *this;
}

std::strong_ordering operator<=>(const QuadRat& x, const QuadRat& y) {
  // Denominators are positive, so the sign of x - y is the sign of the
  // cross-multiplied numerator difference.
  const QuadInt d = x.num_ * QuadInt(y.den_) - y.num_ * QuadInt(x.den_);
  const int s = d.sign();
  return s < 0 ? std::strong_ordering::less
               : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

double QuadRat::to_double() const {
  const long double v = static_cast<long double>(num_.a()) +
                        static_cast<long double>(num_.b()) * 1.41421356237309504880L;
  return static_cast<double>(v / static_cast<long double>(den_));
}

QuadRat star(const QuadRat& x) { return QuadRat(star(x.numerator()), x.denominator()); }
QuadRat abs(const QuadRat& x) { return x.sign() < 0 ? -x : x; }
double embed(const QuadRat& x) { return x.to_double(); }
double embed_star(const QuadRat& x) { return star(x).to_double(); }

std::string to_string(const QuadRat& x) {
  if (x.denominator() == 1) return to_string(x.numerator());
  return "(" + to_string(x.numerator()) + ")/" + std::to_string(x.denominator());
}

std::ostream& operator<<(std::ostream& os, const QuadRat& x) { return os << to_string(x); }

// ---- CycloInt --------------------------------------------------------------

CycloInt CycloInt::operator-() const {
  return {checked_sub(0, c_[0]), checked_sub(0, c_[1]), checked_sub(0, c_[2]),
          checked_sub(0, c_[3])};
}

CycloInt& CycloInt::operator+=(const CycloInt& o) {
  for (int j = 0; j < 4; ++j) c_[j] = checked_add(c_[j], o.c_[j]);
  return *this;
}

CycloInt& CycloInt::operator-=(const CycloInt& o) {
  for (int j = 0; j < 4; ++j) c_[j] = checked_sub(c_[j], o.c_[j]);
  return *this;
}

CycloInt& CycloInt::operator*=(const CycloInt& o) {
  __int128 r[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const __int128 p = static_cast<__int128>(c_[i]) * o.c_[j];
      // xi^4 = -1
      if (i + j < 4) r[i + j] += p;
      else r[i + j - 4] -= p;
    }
  }
  for (int j = 0; j < 4; ++j) c_[j] = narrow(r[j]);
  return *this;
}

CycloInt CycloInt::unit(int k) {
  k = ((k % 8) + 8) % 8;
  CycloInt x;
  x.c_[k % 4] = k < 4 ? 1 : -1;
  return x;
}

CycloInt star(const CycloInt& x) {
  // xi -> xi^3: xi^2 -> xi^6 = -xi^2, xi^3 -> xi^9 = xi.
  return {x[0], x[3], checked_sub(0, x[2]), x[1]};
}

Point2 embed(const CycloInt& x) {
  const double r = 1.0 / kSqrt2;
  const double c0 = static_cast<double>(x[0]);
  const double c1 = static_cast<double>(x[1]);
  const double c2 = static_cast<double>(x[2]);
  const double c3 = static_cast<double>(x[3]);
  return {c0 + (c1 - c3) * r, c2 + (c1 + c3) * r};
}

Point2 embed_star(const CycloInt& x) { return embed(star(x)); }

std::string to_string(const CycloInt& x) {
  std::ostringstream os;
  os << "[" << x[0] << "," << x[1] << "," << x[2] << "," << x[3] << "]";
  return os.str();
}

// ---- enumeration -----------------------------------------------------------

namespace {

// Integer pairs (u, v) with |u + v*t| <= p and |u - v*t| <= s for t > 0.
// Shared by the quadratic case (t = sqrt2) and the two independent halves of
// the cyclotomic case (t = 1/sqrt2).
template <class Emit>
void enumerate_pairs(double t, double p, double s, std::size_t cap, std::size_t& inspected,
                     Emit&& emit) {
  const std::int64_t vmax = static_cast<std::int64_t>(std::floor((p + s) / (2.0 * t))) + 1;
  for (std::int64_t v = -vmax; v <= vmax; ++v) {
    const double vt = static_cast<double>(v) * t;
    const double lo = std::max(-p - vt, -s + vt);
    const double hi = std::min(p - vt, s + vt);
    if (lo > hi + 1.0) continue;
    const auto ulo = static_cast<std::int64_t>(std::floor(lo)) - 1;
    const auto uhi = static_cast<std::int64_t>(std::ceil(hi)) + 1;
    inspected += static_cast<std::size_t>(std::max<std::int64_t>(0, uhi - ulo + 1));
    if (inspected > cap) throw ResourceError("enumeration coefficient box exceeds cap");
    for (std::int64_t u = ulo; u <= uhi; ++u) emit(u, v);
  }
}

}  // namespace

std::vector<QuadInt> enumerate_quad_in_box(double physical_bound, double star_bound,
                                           std::size_t cap) {
  if (!(physical_bound > 0) || !(star_bound > 0)) throw ArgumentError("bounds must be positive");
  std::vector<QuadInt> out;
  std::size_t inspected = 0;
  enumerate_pairs(kSqrt2, physical_bound, star_bound, cap, inspected,
                  [&](std::int64_t a, std::int64_t b) {
                    const QuadInt x(a, b);
                    if (std::abs(embed(x)) <= physical_bound &&
                        std::abs(embed_star(x)) <= star_bound) {
                      out.push_back(x);
                    }
                  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CycloInt> enumerate_cyclo_in_box(double physical_bound, double star_bound,
                                             std::size_t cap) {
  if (!(physical_bound > 0) || !(star_bound > 0)) throw ArgumentError("bounds must be positive");
  // Re x = c0 + d/sqrt2, Re x* = c0 - d/sqrt2 with d = c1 - c3;
  // Im x = c2 + e/sqrt2, Im x* = -c2 + e/sqrt2 with e = c1 + c3.
  const double t = 1.0 / kSqrt2;
  const double slack = 1e-12 * (1.0 + physical_bound + star_bound);
  std::vector<std::pair<std::int64_t, std::int64_t>> re_pairs, im_pairs;
  std::size_t inspected = 0;
  enumerate_pairs(t, physical_bound + slack, star_bound + slack, cap, inspected,
                  [&](std::int64_t c0, std::int64_t d) {
                    const double x = c0 + d * t, xs = c0 - d * t;
                    if (std::abs(x) <= physical_bound + slack && std::abs(xs) <= star_bound + slack)
                      re_pairs.emplace_back(c0, d);
                  });
  enumerate_pairs(t, physical_bound + slack, star_bound + slack, cap, inspected,
                  [&](std::int64_t c2, std::int64_t e) {
                    const double y = c2 + e * t, ys = -c2 + e * t;
                    if (std::abs(y) <= physical_bound + slack && std::abs(ys) <= star_bound + slack)
                      im_pairs.emplace_back(c2, e);
                  });
  if (re_pairs.size() * im_pairs.size() > 2 * cap)
    throw ResourceError("enumeration coefficient box exceeds cap");
  std::vector<CycloInt> out;
  for (const auto& [c0, d] : re_pairs) {
    for (const auto& [c2, e] : im_pairs) {
      if (((d + e) % 2) != 0) continue;
      const CycloInt x(c0, (d + e) / 2, c2, (e - d) / 2);
      const Point2 p = embed(x);
      const Point2 q = embed_star(x);
      if (p.cwiseAbs().maxCoeff() <= physical_bound && q.cwiseAbs().maxCoeff() <= star_bound)
        out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace selfsim
