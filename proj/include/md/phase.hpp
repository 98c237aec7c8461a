#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "md/rational.hpp"

namespace md {

using cx = std::complex<double>;

// A root of unity exp(2*pi*i * num/den), kept reduced with 0 <= num < den.
struct Phase {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Phase() = default;
  Phase(std::int64_t n, std::int64_t d);

  static Phase one() { return Phase(); }
  static Phase minus_one() { return Phase(1, 2); }
  // exp(2*pi*i/n)
  static Phase zeta(std::int64_t n, std::int64_t k = 1) { return Phase(k, n); }

  Phase operator*(const Phase& o) const;
  Phase inv() const { return Phase(-num, den); }
  Phase conj() const { return inv(); }
  Phase pow(std::int64_t k) const;

  bool operator==(const Phase& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Phase& o) const { return !(*this == o); }
  bool operator<(const Phase& o) const;  // by angle

  bool is_one() const { return num == 0; }
  bool is_minus_one() const { return den == 2 && num == 1; }
  bool is_real_sign() const { return is_one() || is_minus_one(); }
  int as_sign() const;  // +1 / -1, error otherwise
  // multiplicative order (= den once reduced)
  std::int64_t order() const { return den; }

  cx eval() const;
  std::string str() const;  // "num/den"
  static Phase parse(const std::string& s);
};

Phase phase_make(std::int64_t num, std::int64_t den);

// Finite rational combination of roots of unity with exact zero / rational
// testing via reduction modulo the cyclotomic polynomial.
class PhaseSum {
public:
  PhaseSum() = default;
  PhaseSum(const Phase& p) { add(p, 1); }
  static PhaseSum rational(const Rational& r);

  void add(const Phase& p, const Rational& coeff);
  PhaseSum& operator+=(const PhaseSum& o);
  PhaseSum& operator-=(const PhaseSum& o);
  PhaseSum operator+(const PhaseSum& o) const;
  PhaseSum operator-(const PhaseSum& o) const;
  PhaseSum operator*(const PhaseSum& o) const;
  PhaseSum operator*(const Rational& r) const;
  PhaseSum operator*(const Phase& p) const;  // rotate every term
  PhaseSum conj() const;

  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<Phase, Rational>& terms() const { return terms_; }

  cx eval() const;
  bool is_zero() const;
  // exact rational value if the sum is rational, empty otherwise
  std::optional<Rational> as_rational() const;

private:
  std::map<Phase, Rational> terms_;  // zero coefficients never stored
};

bool phasesum_is_zero(const PhaseSum& s);
std::optional<Rational> phasesum_as_rational(const PhaseSum& s);

// Polynomial over Q, coefficients lowest degree first, trailing zeros trimmed.
struct RationalPoly {
  std::vector<Rational> c;

  void trim();
  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }

  RationalPoly operator*(const RationalPoly& o) const;
  RationalPoly operator-(const RationalPoly& o) const;
  // exact division; error when the remainder is nonzero
  RationalPoly divide_exact(const RationalPoly& d) const;
  // remainder of *this modulo monic d
  RationalPoly mod(const RationalPoly& d) const;
};

// n-th cyclotomic polynomial, cached.
const RationalPoly& cyclotomic_polynomial(std::int64_t n);

// Jacobi symbol (a/n) for odd positive n.
int jacobi_symbol(std::int64_t a, std::int64_t n);

std::int64_t gcd_i64(std::int64_t a, std::int64_t b);
std::int64_t lcm_i64(std::int64_t a, std::int64_t b);

}  // namespace md
