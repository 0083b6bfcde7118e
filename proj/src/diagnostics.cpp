#include "mfa/diagnostics.hpp"

#include <sstream>

#include "mfa/format.hpp"

namespace mfa {

DiagnosticsReport diagnose(const System& system, std::size_t p_max) {
  DiagnosticsReport r;
  r.osc = check_osc(system);
  r.primitive = check_finitely_primitive(system, p_max);
  r.bsc = check_bsc(system);
  r.cofinitely_regular = check_cofinite_regularity(system);
  r.norm_comparability = norm_comparability_constant(system);
  r.theta = finiteness_parameter(system);
  r.contraction = system.contraction();
  r.contraction_prefactor = system.contraction_prefactor();
  r.distortion = estimate_distortion_constant(system);
  return r;
}

std::vector<std::pair<std::string, std::string>> DiagnosticsReport::lines() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("osc_ok", osc.ok ? "true" : "false");
  out.emplace_back("osc_worst_overlap", format_real(osc.worst_overlap));
  out.emplace_back("primitive", to_string(primitive.verdict));
  out.emplace_back("primitive_p", std::to_string(primitive.p));
  out.emplace_back("primitive_witnesses", std::to_string(primitive.witnesses.size()));
  out.emplace_back("bsc_gap", bsc.gap ? format_real(*bsc.gap) : "unknown");
  if (!bsc.exact.empty()) out.emplace_back("bsc_gap_exact", bsc.exact);
  if (!bsc.reason.empty()) out.emplace_back("bsc_reason", bsc.reason);
  out.emplace_back("cofinitely_regular", to_string(cofinitely_regular.verdict));
  out.emplace_back("cofinitely_regular_reason", cofinitely_regular.reason);
  out.emplace_back("norm_comparability_constant", format_real(norm_comparability));
  out.emplace_back("theta", format_real(theta));
  out.emplace_back("contraction", format_real(contraction));
  out.emplace_back("contraction_prefactor", format_real(contraction_prefactor));
  out.emplace_back("distortion_constant", distortion.constant ? format_real(*distortion.constant) : "unknown");
  out.emplace_back("distortion_level_one_ratio", format_real(distortion.level_one_ratio));
  out.emplace_back("distortion_method", distortion.method);
  return out;
}

}  // namespace mfa
