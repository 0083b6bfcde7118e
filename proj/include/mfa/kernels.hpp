#pragma once

// Hot loops behind the pressure estimators. Each kernel exists twice: a plain
// serial reference and an OpenMP version. Tests pin the two against each other
// and the benchmark target compares their throughput.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mfa/gdms.hpp"
#include "mfa/potentials.hpp"

namespace mfa::kernels {

/// Streaming log-sum-exp accumulator.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;

  void add(double x);
  void merge(const LogSum& other);
  double value() const;
};

/// log Z_inf(n) and log Z_sup(n) for every n = 1..n_max, where
/// Z_sup(n) = sum over E_A^n of exp(sup over the cylinder of S_w F_{q,t}) and
/// Z_inf likewise with the infimum.
struct PartitionTable {
  std::vector<double> log_z_inf;
  std::vector<double> log_z_sup;
  std::vector<std::uint64_t> word_count;
};

PartitionTable partition_table_serial(const System& system, const PotentialFamily& family,
                                      const QTWeights& weights, std::size_t n_max, std::uint64_t budget);
PartitionTable partition_table_parallel(const System& system, const PotentialFamily& family,
                                        const QTWeights& weights, std::size_t n_max, std::uint64_t budget);

/// State space of the collocation operator: per-vertex pieces when the
/// incidence is induced by the multigraph, otherwise one piece per edge with
/// incidence masking.
enum class CollocationMode { vertex, edge };

struct CollocationGrid {
  CollocationMode mode = CollocationMode::vertex;
  std::size_t nodes = 0;
  std::vector<Interval> pieces;  ///< domain of each state
  std::vector<double> points;    ///< pieces.size() * nodes node coordinates
};

CollocationGrid make_collocation_grid(const System& system, std::size_t nodes);

/// Chebyshev (first kind) nodes on [lo, hi] and barycentric weights.
std::vector<double> chebyshev_nodes(const Interval& iv, std::size_t m);
std::vector<double> barycentric_weights(std::size_t m);
/// Lagrange basis values at z for the given nodes/weights.
void lagrange_row(const std::vector<double>& nodes, const std::vector<double>& weights, double z, double* out);

Eigen::MatrixXd collocation_matrix_serial(const System& system, const PotentialFamily& family,
                                          const QTWeights& weights, const CollocationGrid& grid);
Eigen::MatrixXd collocation_matrix_parallel(const System& system, const PotentialFamily& family,
                                            const QTWeights& weights, const CollocationGrid& grid);

}  // namespace mfa::kernels
