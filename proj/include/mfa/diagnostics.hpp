#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfa/gdms.hpp"
#include "mfa/pressure.hpp"

namespace mfa {

struct DiagnosticsReport {
  OscReport osc;
  PrimitivityVerdict primitive;
  BscReport bsc;
  RegularityVerdict cofinitely_regular;
  double norm_comparability = 0.0;  ///< inf when unbounded on the truncation
  double theta = 0.0;
  double contraction = 0.0;
  double contraction_prefactor = 1.0;
  DistortionEstimate distortion;

  /// key: value lines in a fixed order.
  std::vector<std::pair<std::string, std::string>> lines() const;
};

DiagnosticsReport diagnose(const System& system, std::size_t p_max = 64);

}  // namespace mfa
