#include <cmath>
#include <string>

#include "mfa/errors.hpp"
#include "mfa/potentials.hpp"
#include "mfa/pressure.hpp"

namespace mfa {

PotentialFamily normalize(const System& system, const PotentialFamily& family, NormalizeOptions options) {
  PotentialFamily current = family;
  double p = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const PressureEstimate est = pressure(system, current, 1.0, 0.0);
    p = est.value;
    if (pass > 0 && std::abs(p) <= options.tolerance) return current;
    current = current.with_normalization(current.normalization() + p, "collocation(" + std::to_string(est.level) + ")");
  }
  p = pressure(system, current, 1.0, 0.0).value;
  if (std::abs(p) > options.tolerance)
    throw ConvergenceError("normalized pressure " + std::to_string(p) + " misses tolerance");
  return current;
}

}  // namespace mfa
