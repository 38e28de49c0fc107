#include "selfsim/padic.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"
#include "selfsim/errors.hpp"

namespace selfsim {

namespace {

void require_window(int i) {
  if (i < 1 || i > 3) throw ArgumentError("ternary window index must be 1, 2 or 3");
}

void require_precision(int K, int lo) {
  if (K < lo) throw ArgumentError("3-adic precision must be at least " + std::to_string(lo));
  if (K > kMaxPadicPrecision) throw ResourceError("3-adic precision above " + std::to_string(kMaxPadicPrecision));
}

std::int64_t mod(std::int64_t x, std::int64_t m) {
  const std::int64_t r = x % m;
  return r < 0 ? r + m : r;
}

// Coset centre of depth k in window i (k >= 2; k >= 3 for the tail of W_3).
std::int64_t centre(int i, int k) {
  std::int64_t s = 0;
  if (i == 3) {
    for (int t = 1; t <= k - 2; ++t) s -= pow3(t);
    return s;
  }
  for (int t = 0; t <= k - 2; ++t) s += pow3(t);
  return i == 2 ? s + 2 : s;
}

std::vector<char> residue_mask(int i, int K, ResidueMode mode) {
  const std::int64_t M = pow3(K);
  std::vector<char> in(static_cast<std::size_t>(M), 0);
  auto add = [&](std::int64_t c, int k) {
    const std::int64_t q = pow3(std::min(k, K));
    for (std::int64_t r = mod(c, q); r < M; r += q) in[static_cast<std::size_t>(r)] = 1;
  };
  const int top = mode == ResidueMode::meeting ? K + 1 : K;
  if (i == 3) {
    add(0, 2);
    for (int k = 3; k <= top; ++k) add(centre(3, k), k);
  } else {
    for (int k = 2; k <= top; ++k) add(centre(i, k), k);
  }
  return in;
}

}  // namespace

std::int64_t pow3(int k) {
  if (k < 0 || k > 39) throw ArgumentError("power of 3 out of range");
  std::int64_t p = 1;
  for (int t = 0; t < k; ++t) p *= 3;
  return p;
}

std::vector<std::int64_t> window_residues(int i, int K, ResidueMode mode) {
  require_window(i);
  require_precision(K, 2);
  const auto in = residue_mask(i, K, mode);
  std::vector<std::int64_t> out;
  for (std::size_t r = 0; r < in.size(); ++r)
    if (in[r]) out.push_back(static_cast<std::int64_t>(r));
  return out;
}

Rational window_measure(int i, int K, ResidueMode mode) {
  return Rational(static_cast<std::int64_t>(window_residues(i, K, mode).size()), pow3(K));
}

std::optional<bool> window_membership(int i, std::int64_t x, int K) {
  require_window(i);
  require_precision(K, 2);
  const std::int64_t M = pow3(K), r = mod(x, M);
  // The contained set is the meeting set minus the single deepest class.
  const std::int64_t deepest = mod(centre(i, K + 1), M);
  const auto in = residue_mask(i, K, ResidueMode::contained);
  if (in[static_cast<std::size_t>(r)]) return true;
  if (r == deepest) return std::nullopt;
  return false;
}

std::vector<std::int64_t> ternary_model_set(int i, std::int64_t radius, int K) {
  require_window(i);
  require_precision(K, 2);
  if (radius < 0) throw ArgumentError("radius must be nonnegative");
  const std::int64_t M = pow3(K);
  const auto in = residue_mask(i, K, ResidueMode::contained);
  const std::int64_t deepest = mod(centre(i, K + 1), M);
  std::vector<std::int64_t> out;
  for (std::int64_t x = -radius; x <= radius; ++x) {
    const std::int64_t r = mod(x, M);
    if (r == deepest && !in[static_cast<std::size_t>(r)])
      throw ArgumentError("precision K = " + std::to_string(K) + " cannot decide membership of " + std::to_string(x));
    if (in[static_cast<std::size_t>(r)]) out.push_back(x);
  }
  return out;
}

PadicDensity::PadicDensity(int K) : K_(K) {
  require_precision(K, 1);
  w_.assign(static_cast<std::size_t>(pow3(K)), Rational(0));
}

PadicDensity::PadicDensity(int K, std::vector<Rational> weights) : K_(K), w_(std::move(weights)) {
  require_precision(K, 1);
  if (static_cast<std::int64_t>(w_.size()) != pow3(K)) throw ArgumentError("need one weight per residue mod 3^K");
  for (const auto& x : w_)
    if (x < 0) throw ArgumentError("densities are nonnegative");
}

PadicDensity PadicDensity::uniform(int K) {
  PadicDensity d(K);
  std::fill(d.w_.begin(), d.w_.end(), Rational(1));
  return d;
}

PadicDensity PadicDensity::spike(int K, std::int64_t r, const Rational& mass) {
  PadicDensity d(K);
  if (mass < 0) throw ArgumentError("densities are nonnegative");
  d.w_[static_cast<std::size_t>(mod(r, d.modulus()))] = mass * d.modulus();
  return d;
}

PadicDensity PadicDensity::indicator(int K, const std::vector<std::int64_t>& residues, const Rational& mass) {
  PadicDensity d(K);
  if (residues.empty()) throw ArgumentError("indicator of an empty residue set");
  if (mass < 0) throw ArgumentError("densities are nonnegative");
  std::vector<std::int64_t> rs;
  for (auto r : residues) rs.push_back(mod(r, d.modulus()));
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  const Rational h = mass * d.modulus() / static_cast<std::int64_t>(rs.size());
  for (auto r : rs) d.w_[static_cast<std::size_t>(r)] = h;
  return d;
}

Rational PadicDensity::mass() const {
  Rational s = 0;
  for (const auto& x : w_) s += x;
  return s / modulus();
}

std::vector<std::int64_t> PadicDensity::support() const {
  std::vector<std::int64_t> out;
  for (std::size_t r = 0; r < w_.size(); ++r)
    if (w_[r] != 0) out.push_back(static_cast<std::int64_t>(r));
  return out;
}

PadicDensity padic_convolve(const PadicDensity& u, const PadicDensity& v) {
  if (u.precision() != v.precision()) throw ArgumentError("convolution needs equal precision");
  const std::int64_t M = u.modulus();
  std::vector<Rational> out(static_cast<std::size_t>(M), Rational(0));
  const auto su = u.support(), sv = v.support();
  for (auto a : su)
    for (auto b : sv) out[static_cast<std::size_t>((a + b) % M)] += u[a] * v[b];
  for (auto& x : out) x /= M;
  return PadicDensity(u.precision(), std::move(out));
}

PadicDensity padic_scale(const PadicDensity& u) {
  const std::int64_t M = u.modulus();
  std::vector<Rational> out(static_cast<std::size_t>(M), Rational(0));
  for (auto r : u.support()) out[static_cast<std::size_t>((3 * r) % M)] += u[r];
  return PadicDensity(u.precision(), std::move(out));
}

std::vector<std::int64_t> padic_maximal_family(int i, int j, int K) {
  require_window(i);
  require_window(j);
  require_precision(K, 3);
  const std::int64_t M = pow3(K);
  const auto wj = window_residues(j, K - 1, ResidueMode::meeting);
  const auto wi = residue_mask(i, K, ResidueMode::contained);
  std::vector<std::int64_t> out;
  for (std::int64_t b = 0; b < M; ++b) {
    bool ok = true;
    for (auto r : wj)
      if (!wi[static_cast<std::size_t>((3 * r + b) % M)]) {
        ok = false;
        break;
      }
    if (ok) out.push_back(b);
  }
  return out;
}

PadicSolution solve_padic_system(int K, int max_iter) {
  require_precision(K, 4);
  if (max_iter < 1) throw ArgumentError("max_iter must be positive");
  PadicSolution sol;
  sol.precision = K;
  // number of letters i in the image of letter j under a -> ab, b -> abc, c -> abcc
  const int count[3][3] = {{1, 1, 1}, {1, 1, 1}, {0, 1, 2}};
  for (int i = 0; i < 3; ++i) {
    sol.m[static_cast<std::size_t>(i)] = 1;
    for (int j = 0; j < 3; ++j) sol.s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Rational(count[i][j], 3);
  }
  std::vector<std::vector<std::optional<PadicDensity>>> sigma(3, std::vector<std::optional<PadicDensity>>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto& f = sol.families[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      f = padic_maximal_family(i + 1, j + 1, K);
      const Rational& s = sol.s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (s == 0) continue;
      if (f.empty()) throw CompatibilityError("no translations for a used family entry");
      sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = PadicDensity::indicator(K, f, s);
    }
  std::vector<PadicDensity> omega;
  for (int i = 0; i < 3; ++i) omega.push_back(PadicDensity::spike(K, 0, sol.m[static_cast<std::size_t>(i)]));
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<PadicDensity> scaled;
    for (const auto& w : omega) scaled.push_back(padic_scale(w));
    std::vector<PadicDensity> next;
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<Rational> acc(static_cast<std::size_t>(pow3(K)), Rational(0));
      for (std::size_t j = 0; j < 3; ++j) {
        if (!sigma[i][j]) continue;
        const auto c = padic_convolve(*sigma[i][j], scaled[j]);
        for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += c.weights()[r];
      }
      next.emplace_back(K, std::move(acc));
    }
    const bool same = next == omega;
    omega = std::move(next);
    if (same) {
      sol.omega = std::move(omega);
      sol.iterations = it;
      return sol;
    }
  }
  throw NonConvergenceError("3-adic iteration did not become stationary", max_iter, 1.0);
}

std::vector<PadicDensity> padic_closed_form(int K, const std::array<Rational, 3>& m) {
  require_precision(K, 2);
  const std::int64_t c[3] = {1, 3, 0};
  std::vector<PadicDensity> out;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Rational> w(static_cast<std::size_t>(pow3(K)), Rational(0));
    for (std::int64_t r = c[i]; r < pow3(K); r += 9) w[static_cast<std::size_t>(r)] = 9 * m[i];
    out.emplace_back(K, std::move(w));
  }
  return out;
}

void write_padic_csv(std::ostream& os, const PadicDensity& d) {
  os << "residue,weight_num,weight_den\n";
  for (std::int64_t r = 0; r < d.modulus(); ++r)
    os << r << ',' << numerator(d[r]) << ',' << denominator(d[r]) << '\n';
}

std::string padic_to_json(const PadicSolution& sol) {
  auto q = [](const Rational& x) {
    return nlohmann::ordered_json{{"num", numerator(x).str()}, {"den", denominator(x).str()}};
  };
  nlohmann::ordered_json j;
  j["K"] = sol.precision;
  j["modulus"] = pow3(sol.precision);
  j["iterations"] = sol.iterations;
  auto& s = j["s"] = nlohmann::ordered_json::array();
  for (const auto& row : sol.s) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& x : row) r.push_back(q(x));
    s.push_back(r);
  }
  auto& m = j["m"] = nlohmann::ordered_json::array();
  for (const auto& x : sol.m) m.push_back(q(x));
  auto& fam = j["families"] = nlohmann::ordered_json::array();
  for (const auto& row : sol.families) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& f : row) r.push_back(f);
    fam.push_back(r);
  }
  auto& comps = j["components"] = nlohmann::ordered_json::array();
  for (const auto& w : sol.omega) {
    nlohmann::ordered_json c;
    c["mass"] = q(w.mass());
    auto& sup = c["support"] = nlohmann::ordered_json::array();
    for (auto r : w.support()) sup.push_back({{"residue", r}, {"weight", q(w[r])}});
    comps.push_back(c);
  }
  return j.dump(2);
}

}  // namespace selfsim
