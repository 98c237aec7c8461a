#include "md/phase.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace md {

std::int64_t gcd_i64(std::int64_t a, std::int64_t b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t lcm_i64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  return a / gcd_i64(a, b) * b;
}

Phase::Phase(std::int64_t n, std::int64_t d) {
  require(d >= 1, errc::invalid_argument, "phase denominator must be positive");
  n %= d;
  if (n < 0) n += d;
  std::int64_t g = gcd_i64(n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Phase phase_make(std::int64_t num, std::int64_t den) { return Phase(num, den); }

Phase Phase::operator*(const Phase& o) const {
  std::int64_t d = lcm_i64(den, o.den);
  // exponents are small; d stays within the lcm of the participating orders
  return Phase(num * (d / den) + o.num * (d / o.den), d);
}

Phase Phase::pow(std::int64_t k) const {
  std::int64_t e = k % den;
  if (e < 0) e += den;
  return Phase(num * e, den);
}

bool Phase::operator<(const Phase& o) const {
  // compare num/den < o.num/o.den ; both in [0,1), denominators modest
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

int Phase::as_sign() const {
  if (is_one()) return 1;
  if (is_minus_one()) return -1;
  fail(errc::inconsistency, "phase " + str() + " expected to be +1 or -1");
}

cx Phase::eval() const {
  double t = 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(t), std::sin(t)};
}

std::string Phase::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Phase Phase::parse(const std::string& s) {
  auto slash = s.find('/');
  require(slash != std::string::npos, errc::parse, "phase literal needs num/den: " + s);
  try {
    std::int64_t n = std::stoll(s.substr(0, slash));
    std::int64_t d = std::stoll(s.substr(slash + 1));
    require(d >= 1, errc::parse, "phase denominator must be positive: " + s);
    return Phase(n, d);
  } catch (const std::invalid_argument&) {
    fail(errc::parse, "bad phase literal: " + s);
  } catch (const std::out_of_range&) {
    fail(errc::parse, "phase literal out of range: " + s);
  }
}

PhaseSum PhaseSum::rational(const Rational& r) {
  PhaseSum s;
  s.add(Phase::one(), r);
  return s;
}

void PhaseSum::add(const Phase& p, const Rational& coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(p);
  if (it == terms_.end()) {
    terms_.emplace(p, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

PhaseSum& PhaseSum::operator+=(const PhaseSum& o) {
  for (const auto& [p, c] : o.terms_) add(p, c);
  return *this;
}

PhaseSum& PhaseSum::operator-=(const PhaseSum& o) {
  for (const auto& [p, c] : o.terms_) add(p, -c);
  return *this;
}

PhaseSum PhaseSum::operator+(const PhaseSum& o) const {
  PhaseSum r = *this;
  r += o;
  return r;
}

PhaseSum PhaseSum::operator-(const PhaseSum& o) const {
  PhaseSum r = *this;
  r -= o;
  return r;
}

PhaseSum PhaseSum::operator*(const PhaseSum& o) const {
  PhaseSum r;
  for (const auto& [p, c] : terms_)
    for (const auto& [q, d] : o.terms_) r.add(p * q, c * d);
  return r;
}

PhaseSum PhaseSum::operator*(const Rational& x) const {
  PhaseSum r;
  if (x == 0) return r;
  for (const auto& [p, c] : terms_) r.add(p, c * x);
  return r;
}

PhaseSum PhaseSum::operator*(const Phase& q) const {
  PhaseSum r;
  for (const auto& [p, c] : terms_) r.add(p * q, c);
  return r;
}

PhaseSum PhaseSum::conj() const {
  PhaseSum r;
  for (const auto& [p, c] : terms_) r.add(p.conj(), c);
  return r;
}

cx PhaseSum::eval() const {
  cx z = 0;
  for (const auto& [p, c] : terms_) z += c.get_d() * p.eval();
  return z;
}

void RationalPoly::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

RationalPoly RationalPoly::operator*(const RationalPoly& o) const {
  RationalPoly r;
  if (c.empty() || o.c.empty()) return r;
  r.c.assign(c.size() + o.c.size() - 1, Rational(0));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
  }
  r.trim();
  return r;
}

RationalPoly RationalPoly::operator-(const RationalPoly& o) const {
  RationalPoly r = *this;
  if (r.c.size() < o.c.size()) r.c.resize(o.c.size(), Rational(0));
  for (std::size_t i = 0; i < o.c.size(); ++i) r.c[i] -= o.c[i];
  r.trim();
  return r;
}

RationalPoly RationalPoly::divide_exact(const RationalPoly& d) const {
  require(!d.is_zero(), errc::invalid_argument, "division by zero polynomial");
  RationalPoly rem = *this;
  RationalPoly quo;
  if (rem.degree() >= d.degree()) quo.c.assign(rem.degree() - d.degree() + 1, Rational(0));
  while (!rem.is_zero() && rem.degree() >= d.degree()) {
    int k = rem.degree() - d.degree();
    Rational f = rem.c.back() / d.c.back();
    quo.c[k] = f;
    for (int i = 0; i <= d.degree(); ++i) rem.c[i + k] -= f * d.c[i];
    rem.trim();
  }
  require(rem.is_zero(), errc::inconsistency, "polynomial division expected to be exact");
  quo.trim();
  return quo;
}

RationalPoly RationalPoly::mod(const RationalPoly& d) const {
  require(!d.is_zero(), errc::invalid_argument, "division by zero polynomial");
  RationalPoly rem = *this;
  while (!rem.is_zero() && rem.degree() >= d.degree()) {
    int k = rem.degree() - d.degree();
    Rational f = rem.c.back() / d.c.back();
    for (int i = 0; i <= d.degree(); ++i) rem.c[i + k] -= f * d.c[i];
    rem.trim();
  }
  return rem;
}

const RationalPoly& cyclotomic_polynomial(std::int64_t n) {
  require(n >= 1, errc::invalid_argument, "cyclotomic index must be >= 1");
  static std::unordered_map<std::int64_t, RationalPoly> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Phi_n = (x^n - 1) / prod_{d|n, d<n} Phi_d, computed without re-locking.
  std::vector<std::int64_t> stack{n};
  while (!stack.empty()) {
    std::int64_t m = stack.back();
    bool ready = true;
    for (std::int64_t d = 1; d < m; ++d) {
      if (m % d == 0 && !cache.count(d)) {
        stack.push_back(d);
        ready = false;
      }
    }
    if (!ready) continue;
    stack.pop_back();
    if (cache.count(m)) continue;
    RationalPoly xn;
    xn.c.assign(static_cast<std::size_t>(m) + 1, Rational(0));
    xn.c[0] = -1;
    xn.c.back() = 1;
    RationalPoly acc;
    acc.c = {Rational(1)};
    for (std::int64_t d = 1; d < m; ++d)
      if (m % d == 0) acc = acc * cache.at(d);
    cache.emplace(m, xn.divide_exact(acc));
  }
  return cache.at(n);
}

namespace {

// residue of the phase sum in the basis 1, z, ..., z^(phi(N)-1) of Q(zeta_N)
RationalPoly reduce_mod_cyclotomic(const PhaseSum& s) {
  std::int64_t N = 1;
  for (const auto& [p, c] : s.terms()) {
    N = lcm_i64(N, p.den);
    require(N <= 5000, errc::resource_limit, "phase sum conductor too large");
  }
  RationalPoly poly;
  poly.c.assign(static_cast<std::size_t>(N), Rational(0));
  for (const auto& [p, c] : s.terms()) poly.c[static_cast<std::size_t>(p.num * (N / p.den))] += c;
  poly.trim();
  return poly.mod(cyclotomic_polynomial(N));
}

}  // namespace

bool PhaseSum::is_zero() const {
  if (terms_.empty()) return true;
  return reduce_mod_cyclotomic(*this).is_zero();
}

std::optional<Rational> PhaseSum::as_rational() const {
  if (terms_.empty()) return Rational(0);
  RationalPoly r = reduce_mod_cyclotomic(*this);
  if (r.is_zero()) return Rational(0);
  if (r.degree() == 0) return r.c[0];
  return std::nullopt;
}

bool phasesum_is_zero(const PhaseSum& s) { return s.is_zero(); }

std::optional<Rational> phasesum_as_rational(const PhaseSum& s) { return s.as_rational(); }

int jacobi_symbol(std::int64_t a, std::int64_t n) {
  require(n >= 1 && n % 2 == 1, errc::invalid_argument, "jacobi symbol needs odd positive n");
  a %= n;
  if (a < 0) a += n;
  int result = 1;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      std::int64_t r = n % 8;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

}  // namespace md
