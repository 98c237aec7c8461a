#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "md/common.hpp"

namespace md {

// Exact rational scalar. Cyclotomic reduction blows up intermediate
// numerators well past 64 bits, hence GMP.
using Rational = mpq_class;

inline Rational rat(std::int64_t n, std::int64_t d = 1) {
  require(d != 0, errc::invalid_argument, "rational with zero denominator");
  Rational r(static_cast<long>(n), static_cast<long>(d));
  r.canonicalize();
  return r;
}

inline bool rat_is_integer(const Rational& r) { return r.get_den() == 1; }

inline std::optional<std::int64_t> rat_to_i64(const Rational& r) {
  if (!rat_is_integer(r)) return std::nullopt;
  if (!r.get_num().fits_slong_p()) return std::nullopt;
  return static_cast<std::int64_t>(r.get_num().get_si());
}

inline std::string rat_to_string(const Rational& r) { return r.get_str(); }

inline Rational rat_from_string(const std::string& s) {
  Rational r;
  if (r.set_str(s, 10) != 0) fail(errc::parse, "bad rational literal: " + s);
  r.canonicalize();
  require(r.get_den() != 0, errc::parse, "rational with zero denominator: " + s);
  return r;
}

}  // namespace md
