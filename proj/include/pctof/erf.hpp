#pragma once

#include <cmath>

#include "pctof/errors.hpp"

namespace pctof {

/// Error function. Thin wrapper over the platform's correctly rounded
/// implementation that enforces exact odd symmetry, erf(-x) == -erf(x),
/// by always evaluating on the non-negative half axis.
inline double erf_eval(double x) {
  if (std::isnan(x)) throw DomainError("erf_eval: argument is NaN");
  if (std::isinf(x)) return x > 0.0 ? 1.0 : -1.0;
  return x < 0.0 ? -std::erf(-x) : std::erf(x);
}

}  // namespace pctof
