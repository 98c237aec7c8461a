#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "md/phase.hpp"

using namespace md;

TEST_CASE("phase construction reduces and normalizes") {
  CHECK(phase_make(0, 1) == Phase::one());
  CHECK(phase_make(5, 10) == Phase(1, 2));
  CHECK(phase_make(9, 8) == Phase(1, 8));
  CHECK(phase_make(-1, 4) == Phase(3, 4));
  CHECK(phase_make(7, 14) == Phase(1, 2));
  // phase_make(a,b) == phase_make(a+b,b)
  for (std::int64_t b = 1; b <= 12; ++b)
    for (std::int64_t a = -5; a <= 17; ++a) CHECK(phase_make(a, b) == phase_make(a + b, b));
  CHECK_THROWS_AS(phase_make(1, 0), error);
}

TEST_CASE("phase evaluation") {
  CHECK(std::abs(Phase(1, 4).eval() - cx(0, 1)) < 1e-12);
  CHECK(std::abs(Phase(1, 8).eval() - cx(std::sqrt(0.5), std::sqrt(0.5))) < 1e-12);
  CHECK(std::abs(Phase(1, 3).eval() - cx(-0.5, std::sqrt(3.0) / 2)) < 1e-12);
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    Phase p(rng() % 40, 1 + rng() % 40), q(rng() % 40, 1 + rng() % 40);
    CHECK(std::abs(std::abs(p.eval()) - 1.0) < 1e-15);
    CHECK(std::abs((p * q).eval() - p.eval() * q.eval()) < 1e-12);
    CHECK(std::abs((p * p.inv()).eval() - cx(1, 0)) < 1e-12);
  }
}

TEST_CASE("cyclotomic polynomials") {
  auto as_ints = [](const RationalPoly& p) {
    std::vector<long> v;
    for (const auto& c : p.c) {
      REQUIRE(rat_is_integer(c));
      v.push_back(static_cast<long>(c.get_num().get_si()));
    }
    return v;
  };
  CHECK(as_ints(cyclotomic_polynomial(1)) == std::vector<long>{-1, 1});
  // frozen from the recursive-division identity x^n-1 = prod of lower factors
  CHECK(as_ints(cyclotomic_polynomial(6)) == std::vector<long>{1, -1, 1});
  CHECK(as_ints(cyclotomic_polynomial(8)) == std::vector<long>{1, 0, 0, 0, 1});
  CHECK(as_ints(cyclotomic_polynomial(12)) == std::vector<long>{1, 0, -1, 0, 1});

  // product over divisors reproduces x^n - 1
  for (std::int64_t n = 1; n <= 64; ++n) {
    RationalPoly prod;
    prod.c = {Rational(1)};
    for (std::int64_t d = 1; d <= n; ++d)
      if (n % d == 0) prod = prod * cyclotomic_polynomial(d);
    REQUIRE(prod.degree() == n);
    CHECK(prod.c[0] == Rational(-1));
    CHECK(prod.c.back() == Rational(1));
    for (int k = 1; k < n; ++k) CHECK(prod.c[k] == 0);
  }
}

TEST_CASE("phase sum zero test") {
  PhaseSum cube;
  cube.add(Phase(0, 3), 1);
  cube.add(Phase(1, 3), 1);
  cube.add(Phase(2, 3), 1);
  CHECK(cube.is_zero());

  PhaseSum z8;
  z8.add(Phase(1, 8), 1);
  z8.add(Phase(5, 8), 1);
  CHECK(z8.is_zero());

  PhaseSum golden;  // zeta5 + zeta5^4 = golden ratio - 1, not zero
  golden.add(Phase(1, 5), 1);
  golden.add(Phase(4, 5), 1);
  CHECK(!golden.is_zero());
  CHECK(std::abs(golden.eval() - cx(0.61803398874989485, 0)) < 1e-12);
}

TEST_CASE("phase sum zero test agrees with numeric evaluation") {
  std::mt19937 rng(11);
  int zeros = 0;
  // denominators up to 24 with a bounded common conductor
  const std::int64_t dens[] = {1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 15, 18, 20, 24};
  for (int trial = 0; trial < 400; ++trial) {
    PhaseSum s;
    int terms = 1 + rng() % 6;
    for (int t = 0; t < terms; ++t) {
      std::int64_t den = dens[rng() % (sizeof(dens) / sizeof(dens[0]))];
      s.add(Phase(rng() % den, den), rat(static_cast<int>(rng() % 5) - 2, 1 + rng() % 3));
    }
    // force some exact cancellations into the stream
    if (trial % 3 == 0) {
      Phase p(rng() % 7, 7);
      s.add(p, 2);
      s.add(p, -2);
    }
    bool exact = s.is_zero();
    bool numeric = std::abs(s.eval()) <= 1e-9;
    CHECK(exact == numeric);
    if (exact) ++zeros;
  }
  CHECK(zeros > 0);  // the stream really exercises both branches
}

TEST_CASE("phase sum rational extraction") {
  PhaseSum two;
  two.add(Phase::one(), 2);
  CHECK(two.as_rational() == Rational(2));

  PhaseSum cancel;
  cancel.add(Phase(1, 4), 1);
  cancel.add(Phase(3, 4), 1);
  cancel.add(Phase::one(), 3);
  CHECK(cancel.as_rational() == Rational(3));

  PhaseSum irr;
  irr.add(Phase(1, 3), 1);
  CHECK(!irr.as_rational().has_value());

  // zeta3 + zeta3^2 = -1 is rational without being a plain constant term
  PhaseSum sum3;
  sum3.add(Phase(1, 3), 1);
  sum3.add(Phase(2, 3), 1);
  CHECK(sum3.as_rational() == Rational(-1));
}

namespace {

int legendre_oracle(std::int64_t a, std::int64_t p) {
  // brute force: a^((p-1)/2) mod p
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  std::int64_t r = 1, base = a, e = (p - 1) / 2;
  while (e) {
    if (e & 1) r = r * base % p;
    base = base * base % p;
    e >>= 1;
  }
  return r == 1 ? 1 : (r == p - 1 ? -1 : 0);
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace

TEST_CASE("jacobi symbol") {
  CHECK(jacobi_symbol(1, 3) == 1);
  CHECK(jacobi_symbol(2, 15) == 1);   // (2/3)(2/5) = (-1)(-1)
  CHECK(jacobi_symbol(3, 5) == -1);   // squares mod 5 are {1,4}
  CHECK_THROWS_AS(jacobi_symbol(3, 4), error);
  CHECK_THROWS_AS(jacobi_symbol(3, -5), error);

  // matches the Legendre oracle at odd primes
  for (std::int64_t p = 3; p <= 199; p += 2) {
    if (!is_prime(p)) continue;
    for (std::int64_t a = 0; a < p; ++a) CHECK(jacobi_symbol(a, p) == legendre_oracle(a, p));
  }
  // multiplicative in both arguments
  for (std::int64_t n = 1; n <= 45; n += 2)
    for (std::int64_t m = 1; m <= 45; m += 2)
      for (std::int64_t a = -6; a <= 6; ++a) {
        CHECK(jacobi_symbol(a, n * m) == jacobi_symbol(a, n) * jacobi_symbol(a, m));
        for (std::int64_t b = 1; b <= 6; ++b)
          CHECK(jacobi_symbol(a * b, n) == jacobi_symbol(a, n) * jacobi_symbol(b, n));
      }
  // quadratic reciprocity for odd coprime pairs up to 200
  for (std::int64_t n = 3; n <= 199; n += 2)
    for (std::int64_t m = 3; m <= 199; m += 2) {
      if (std::gcd(n, m) != 1) continue;
      int sign = ((n - 1) / 2 % 2 == 1 && (m - 1) / 2 % 2 == 1) ? -1 : 1;
      CHECK(jacobi_symbol(n, m) * jacobi_symbol(m, n) == sign);
    }
}
