#pragma once

// Multifractal spectrum f(alpha) produced parametrically in q, with Legendre
// and convexity checks and CSV export.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"
#include "mfa/thermo.hpp"

namespace mfa {

struct QGrid {
  double q_min = -5.0;
  double q_max = 5.0;
  std::size_t steps = 101;

  /// Throws ParameterError unless q_min < q_max and steps >= 2.
  void validate() const;
  std::vector<double> values() const;
};

struct SpectrumCurve {
  std::vector<ThermoPoint> points;  ///< ascending q
  std::vector<PointFailure> failures;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  QGrid grid;
  std::string system_name;
  double theta = 0.0;
  double u = 0.0;
};

SpectrumCurve spectrum_curve(const System& system, const PotentialFamily& family, const QGrid& grid,
                             const SolverOptions& options = {});

/// max |f_value - (T + q alpha_fd)| over interior points: f_value uses the
/// gradient estimator, the comparison uses the finite-difference one.
double legendre_check(const SpectrumCurve& curve);

struct ConvexityReport {
  double min_t_second_difference = 0.0;
  /// min over adjacent triples of f(mid) minus the chord value at alpha(mid)
  double min_f_concavity_gap = 0.0;
  std::size_t t_violations = 0;
  std::size_t f_violations = 0;
  double tolerance = 1e-7;

  bool ok() const { return t_violations == 0 && f_violations == 0; }
};

ConvexityReport convexity_report(const SpectrumCurve& curve, double tolerance = 1e-7);

inline constexpr const char* kSpectrumHeader = "q,T,alpha_fd,alpha_grad,f,chi,residual";

/// Header plus one row per point at 17 significant digits.
void export_curve(const SpectrumCurve& curve, std::ostream& out);
/// Writes to a file; throws ResourceError on I/O failure.
void export_curve(const SpectrumCurve& curve, const std::string& path);

/// Parses a CSV produced by export_curve.
std::vector<ThermoPoint> parse_curve_csv(std::istream& in);

}  // namespace mfa
