#pragma once

// Cylinder-level brackets of the conformal measures, ball measures on the
// line, local-dimension fits and Monte-Carlo sampling of mu_q.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"
#include "mfa/thermo.hpp"

namespace mfa {

struct CylinderCell {
  Word word;
  Interval interval;
  double weight_low = 0.0;
  double weight_high = 0.0;
  std::size_t vertex = 0;  ///< vertex position of i(word)
};

struct MeasureModel {
  std::size_t generation = 0;
  double q = 1.0;
  double t = 0.0;
  /// Sorted by (vertex, interval.lo).
  std::vector<CylinderCell> cells;
  /// cells[vertex_begin[v] .. vertex_begin[v+1]) lie in piece v.
  std::vector<std::size_t> vertex_begin;
  std::vector<double> prefix_low;
  std::vector<double> prefix_high;
  double total_low = 0.0;
  double total_high = 0.0;
  /// max(1 - total_low, total_high - 1) after renormalization.
  double defect = 0.0;
  double min_length = 0.0;
  double max_length = 0.0;
};

/// Generation-n brackets of m_{q,t}.
MeasureModel cylinder_weights(const System& system, const PotentialFamily& family, const QTWeights& weights,
                              std::size_t n, std::uint64_t budget = kDefaultWordBudget);
/// Generation-n brackets of m_F.
MeasureModel cylinder_weights(const System& system, const PotentialFamily& family, std::size_t n,
                              std::uint64_t budget = kDefaultWordBudget);

struct BallMeasure {
  double low = 0.0;   ///< cylinders contained in the ball
  double high = 0.0;  ///< cylinders meeting the ball
  double midpoint() const { return 0.5 * (low + high); }
};

BallMeasure ball_measure(const MeasureModel& model, double x, double r, std::size_t vertex = 0);

struct LocalDimEstimate {
  double x = 0.0;
  std::vector<double> radii;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

/// r_k = diam / 4 * 2^{-k}, stopping before the largest cylinder length.
std::vector<double> default_radii(const System& system, const MeasureModel& model);

/// Least-squares slope of log(midpoint ball measure) against log r. Throws
/// DomainError when a ball misses the support entirely.
LocalDimEstimate local_dimension(const MeasureModel& model, double x, std::span<const double> radii,
                                 std::size_t vertex = 0);

struct SamplingOptions {
  std::size_t count = 200;
  std::size_t word_length = 14;
  std::uint64_t seed = 42;
  std::size_t memory = 1;  ///< block length k of the Markov approximation
  std::size_t max_states = 4096;
};

struct MuQSample {
  std::vector<double> points;
  std::vector<Word> words;
  std::vector<double> edge_frequencies;
};

/// Draws words from the k-block Markov approximation of the Gibbs state of
/// F_{q,T}; weights use the reference point phi_c(left end of X_{t(c)}).
MuQSample sample_mu_q(const System& system, const PotentialFamily& family, double q, double t,
                      const SamplingOptions& options = {});
/// Same, solving T(q) first.
MuQSample sample_mu_q(const System& system, const PotentialFamily& family, double q,
                      const SamplingOptions& options = {}, const SolverOptions& solver = {});

struct ConcentrationResult {
  double q = 0.0;
  double alpha = 0.0;
  double fraction = 0.0;
  double band = 0.0;
  std::vector<LocalDimEstimate> estimates;
};

/// Fraction of mu_q-sampled points whose m_F local dimension lies within band
/// of alpha(q).
ConcentrationResult concentration_test(const System& system, const PotentialFamily& family, double q, double band,
                                       const SamplingOptions& options = {}, const SolverOptions& solver = {});

}  // namespace mfa
