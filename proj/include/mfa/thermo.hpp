#pragma once

// Bowen's equation, the temperature function T(q) defined by P(q, T(q)) = 0,
// and the two independent estimators of alpha(q) = -T'(q).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"
#include "mfa/pressure.hpp"

namespace mfa {

struct SolverOptions {
  CollocationOptions collocation;
  double residual_tolerance = 1e-10;
  double margin = 1e-6;  ///< closest approach to the summability boundary
  std::size_t max_expansions = 60;
  std::size_t max_iterations = 200;
  double fd_step = 1e-3;        ///< T finite-difference step
  double gradient_step = 1e-4;  ///< pressure partial-derivative step
};

struct DimensionEstimate {
  double dimension = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  double residual = 0.0;
  std::size_t bracket_depth = 0;  ///< partition depth used for the bracket, 0 if none
  std::size_t nodes = 0;          ///< collocation nodes at the root
};

struct DimensionOptions {
  SolverOptions solver;
  std::size_t n_max = 16;
  bool bracket = true;
  std::uint64_t budget = kDefaultWordBudget;
};

/// Root of t -> P(0, t) for the geometric potential. On full-shift systems the
/// roots of the partition upper and lower bounds give a certified bracket.
DimensionEstimate hausdorff_dimension(const System& system, const DimensionOptions& options = {});

/// Root of t -> P(q, t) on (theta - qu, inf), optionally starting from a guess.
struct TemperatureRoot {
  double t = 0.0;
  double residual = 0.0;
  std::size_t evaluations = 0;
};
TemperatureRoot temperature_root(const System& system, const PotentialFamily& family, double q,
                                 const SolverOptions& options = {}, std::optional<double> guess = std::nullopt);

struct GradientAlpha {
  double alpha = 0.0;
  double chi = 0.0;  ///< -dP/dt
};

/// -(T(q+h) - T(q-h)) / (2h) with one Richardson step at h/2.
double alpha_from_T_derivative(const System& system, const PotentialFamily& family, double q,
                               const SolverOptions& options = {}, std::optional<double> t_at_q = std::nullopt);

/// (dP/dq) / (dP/dt) at (q, T), i.e. -T'(q) by implicit differentiation.
/// Throws ConvergenceError when |dP/dt| < 1e-6.
GradientAlpha alpha_from_pressure_gradient(const System& system, const PotentialFamily& family, double q, double t,
                                           const SolverOptions& options = {});

struct ThermoPoint {
  double q = 0.0;
  double T = 0.0;
  double alpha_fd = 0.0;
  double alpha_grad = 0.0;
  double chi = 0.0;
  double f_value = 0.0;  ///< q alpha_grad + T
  double root_residual = 0.0;
  /// q alpha + T > theta; the concentration theorems assume it.
  bool hypothesis_ok = true;
};

ThermoPoint solve_temperature(const System& system, const PotentialFamily& family, double q,
                              const SolverOptions& options = {}, std::optional<double> guess = std::nullopt);

struct PointFailure {
  double q = 0.0;
  std::string message;
};

struct TemperatureCurve {
  std::vector<ThermoPoint> points;  ///< ascending q, failed points omitted
  std::vector<PointFailure> failures;
};

/// Number of consecutive grid points solved by one worker with continuation.
inline constexpr std::size_t kContinuationChunk = 8;

/// Solves every q in the grid; chunks of kContinuationChunk points run in
/// parallel, so results do not depend on the thread count.
TemperatureCurve temperature_curve(const System& system, const PotentialFamily& family, std::span<const double> q_grid,
                                   const SolverOptions& options = {}, bool with_alpha = true);

/// Upper bound u + ||Psi|| / (-log s) on alpha(q).
double alpha_upper_bound(const System& system, const PotentialFamily& family);

}  // namespace mfa
