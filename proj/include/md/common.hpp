#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace md {

enum class errc {
  invalid_argument,
  precondition,
  resource_limit,
  integrality,
  inconsistency,
  parse,
  not_found,
};

class error : public std::runtime_error {
public:
  error(errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& what) { throw error(c, what); }

inline void require(bool ok, errc c, const std::string& what) {
  if (!ok) fail(c, what);
}

// default tolerances used across the numeric checks
constexpr double kTolRelations = 1e-9;
constexpr double kTolIntegrality = 1e-6;

}  // namespace md
