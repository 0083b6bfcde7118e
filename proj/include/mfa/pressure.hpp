#pragma once

// Topological pressure P(q, t) of F_{q,t}: certified partition-sum brackets on
// full shifts and Chebyshev collocation of the weighted transfer operator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"

namespace mfa {

enum class Execution { serial, parallel };

enum class PressureMethod { partition, collocation };
const char* to_string(PressureMethod m);

struct PressureEstimate {
  double q = 0.0;
  double t = 0.0;
  double value = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  PressureMethod method = PressureMethod::collocation;
  std::size_t level = 0;  ///< n_max for partition, node count M for collocation
  std::uint64_t word_count = 0;
  double eigen_residual = 0.0;
  /// Running bounds after each depth n = 1..n_max (partition only).
  std::vector<double> upper_by_n;
  std::vector<double> lower_by_n;

  bool certified() const { return lower.has_value() && upper.has_value(); }
  double bracket_width() const { return certified() ? *upper - *lower : 0.0; }
};

struct PartitionSum {
  double log_z_inf = 0.0;
  double log_z_sup = 0.0;
  std::uint64_t word_count = 0;

  double z_inf() const;
  double z_sup() const;
};

/// Z_inf(n), Z_sup(n) of F_{q,t} over E_A^n.
PartitionSum partition_sum(const System& system, const PotentialFamily& family, double q, double t, std::size_t n,
                           std::uint64_t budget = kDefaultWordBudget, Execution exec = Execution::parallel);

/// Certified bracket on full-shift IFS: upper = min_n (1/n) log Z_sup(n),
/// lower = max_n (1/n) log Z_inf(n). Throws UnsupportedStructureError otherwise.
PressureEstimate pressure_bracket(const System& system, const PotentialFamily& family, double q, double t,
                                  std::size_t n_max, std::uint64_t budget = kDefaultWordBudget,
                                  Execution exec = Execution::parallel);

/// Uncertified (1/n) log Z_sup(n) at the deepest affordable n; usable on any
/// incidence structure.
PressureEstimate pressure_partition_heuristic(const System& system, const PotentialFamily& family, double q,
                                              double t, std::size_t n_max,
                                              std::uint64_t budget = kDefaultWordBudget);

struct CollocationOptions {
  std::size_t nodes = 32;
  std::size_t max_nodes = 256;
  double agreement = 1e-10;
  double power_tolerance = 1e-13;
  std::size_t max_iterations = 10000;
  Execution exec = Execution::parallel;
};

struct LeadingEigen {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Power iteration from the constant vector, max-norm normalized.
LeadingEigen power_iteration(const Eigen::MatrixXd& matrix, double tolerance, std::size_t max_iterations);
/// Left Perron vector via power iteration on the transpose.
LeadingEigen left_power_iteration(const Eigen::MatrixXd& matrix, double tolerance, std::size_t max_iterations);

/// log of the leading eigenvalue of the collocated transfer operator on M
/// Chebyshev nodes per piece.
PressureEstimate pressure_collocation(const System& system, const PotentialFamily& family, double q, double t,
                                      std::size_t nodes, const CollocationOptions& options = {});

/// Collocation with node doubling from options.nodes until successive values
/// agree to options.agreement or options.max_nodes is reached.
PressureEstimate pressure(const System& system, const PotentialFamily& family, double q, double t,
                          const CollocationOptions& options = {});

/// theta = 1/gamma from the tail model; 0 for finite systems without a parent.
double finiteness_parameter(const System& system);

struct RegularityVerdict {
  Verdict verdict = Verdict::unknown;
  std::string reason;
};

/// Infinite parent families are cofinitely regular exactly when the
/// theta-series sum ||phi_n'||^theta diverges.
RegularityVerdict check_cofinite_regularity(const System& system);

}  // namespace mfa
