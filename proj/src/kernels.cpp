#include "mfa/kernels.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfa/errors.hpp"

namespace mfa::kernels {

void LogSum::add(double x) {
  if (x == -std::numeric_limits<double>::infinity()) return;
  if (x > max) {
    scaled = scaled * std::exp(max - x) + 1.0;
    max = x;
  } else {
    scaled += std::exp(x - max);
  }
}

void LogSum::merge(const LogSum& other) {
  if (other.max == -std::numeric_limits<double>::infinity()) return;
  if (other.max > max) {
    scaled = scaled * std::exp(max - other.max) + other.scaled;
    max = other.max;
  } else {
    scaled += other.scaled * std::exp(other.max - max);
  }
}

double LogSum::value() const { return max + std::log(scaled); }

namespace {

/// Depth-first walk over admissible words carrying the composite matrix and the
/// edge-constant psi sum, so each cylinder costs O(1).
class PartitionWalker {
 public:
  PartitionWalker(const System& system, const PotentialFamily& family, const QTWeights& weights,
                  std::size_t n_max)
      : system_(system),
        family_(family),
        weights_(weights),
        n_max_(n_max),
        fast_(!system.has_custom_maps() && family.edge_constant()),
        inf_(n_max),
        sup_(n_max),
        count_(n_max, 0) {
    word_.reserve(n_max);
  }

  /// Walks every word that starts with `prefix`, recording depths >= min_depth.
  void walk(const Word& prefix, std::size_t min_depth) {
    word_.clear();
    MoebiusMatrix m;
    double psi = 0.0;
    for (std::size_t e : prefix) {
      word_.push_back(e);
      if (fast_) {
        m = m.then_inner(*system_.matrix(e));
        psi += family_.psi_constant(e);
      }
    }
    min_depth_ = min_depth;
    visit(m, psi);
  }

  void merge_into(PartitionTable& table, std::vector<LogSum>& inf, std::vector<LogSum>& sup) const {
    for (std::size_t n = 0; n < n_max_; ++n) {
      inf[n].merge(inf_[n]);
      sup[n].merge(sup_[n]);
      table.word_count[n] += count_[n];
    }
  }

 private:
  void visit(const MoebiusMatrix& m, double psi) {
    const std::size_t depth = word_.size();
    if (depth >= min_depth_) record(m, psi);
    if (depth == n_max_) return;
    const std::size_t last = word_.back();
    for (std::size_t f = 0; f < system_.num_edges(); ++f) {
      if (!system_.admissible(last, f)) continue;
      word_.push_back(f);
      if (fast_) {
        visit(m.then_inner(*system_.matrix(f)), psi + family_.psi_constant(f));
      } else {
        visit(m, psi);
      }
      word_.pop_back();
    }
  }

  void record(const MoebiusMatrix& m, double psi) {
    const std::size_t n = word_.size() - 1;
    ++count_[n];
    SumBracket b;
    if (fast_) {
      const Interval& dom = system_.domain(word_.back());
      const double l0 = std::log(m.abs_derivative(dom.lo));
      const double l1 = std::log(m.abs_derivative(dom.hi));
      const double log_lo = std::min(l0, l1);
      const double log_hi = std::max(l0, l1);
      const double q = weights_.q;
      const double s = weights_.exponent;
      b.inf_sum = q * psi + (s >= 0 ? s * log_lo : s * log_hi);
      b.sup_sum = q * psi + (s >= 0 ? s * log_hi : s * log_lo);
    } else {
      b = cylinder_sum_bracket(system_, family_, weights_, word_);
    }
    inf_[n].add(b.inf_sum);
    sup_[n].add(b.sup_sum);
  }

  const System& system_;
  const PotentialFamily& family_;
  QTWeights weights_;
  std::size_t n_max_;
  bool fast_;
  std::size_t min_depth_ = 1;
  Word word_;
  std::vector<LogSum> inf_;
  std::vector<LogSum> sup_;
  std::vector<std::uint64_t> count_;
};

void check_budget(const System& system, std::size_t n_max, std::uint64_t budget) {
  if (n_max == 0) throw ParameterError("partition depth must be positive");
  std::uint64_t total = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto c = count_words(system, n);
    total = (c > budget || total > budget - c) ? budget + 1 : total + c;
    if (total > budget)
      throw ResourceError("word budget exceeded at length " + std::to_string(n) + " (budget " +
                          std::to_string(budget) + ")");
  }
}

PartitionTable finish(std::size_t n_max, const std::vector<LogSum>& inf, const std::vector<LogSum>& sup,
                      PartitionTable table) {
  table.log_z_inf.resize(n_max);
  table.log_z_sup.resize(n_max);
  for (std::size_t n = 0; n < n_max; ++n) {
    table.log_z_inf[n] = inf[n].value();
    table.log_z_sup[n] = sup[n].value();
  }
  return table;
}

}  // namespace

PartitionTable partition_table_serial(const System& system, const PotentialFamily& family,
                                      const QTWeights& weights, std::size_t n_max, std::uint64_t budget) {
  check_budget(system, n_max, budget);
  PartitionTable table;
  table.word_count.assign(n_max, 0);
  std::vector<LogSum> inf(n_max), sup(n_max);
  PartitionWalker walker(system, family, weights, n_max);
  for (std::size_t e = 0; e < system.num_edges(); ++e) {
    walker.walk(Word{e}, 1);
  }
  walker.merge_into(table, inf, sup);
  return finish(n_max, inf, sup, std::move(table));
}

PartitionTable partition_table_parallel(const System& system, const PotentialFamily& family,
                                        const QTWeights& weights, std::size_t n_max, std::uint64_t budget) {
  check_budget(system, n_max, budget);
  PartitionTable table;
  table.word_count.assign(n_max, 0);
  std::vector<LogSum> inf(n_max), sup(n_max);

  // Length-1 words are handled up front; deeper words are split by their
  // length-2 prefix so there are enough independent tasks.
  {
    PartitionWalker head(system, family, weights, 1);
    for (std::size_t e = 0; e < system.num_edges(); ++e) head.walk(Word{e}, 1);
    PartitionTable head_table;
    head_table.word_count.assign(1, 0);
    std::vector<LogSum> hi(1), hs(1);
    head.merge_into(head_table, hi, hs);
    inf[0] = hi[0];
    sup[0] = hs[0];
    table.word_count[0] = head_table.word_count[0];
  }
  if (n_max == 1) return finish(n_max, inf, sup, std::move(table));

  std::vector<Word> prefixes;
  for (std::size_t e = 0; e < system.num_edges(); ++e)
    for (std::size_t f = 0; f < system.num_edges(); ++f)
      if (system.admissible(e, f)) prefixes.push_back(Word{e, f});

  const auto tasks = static_cast<std::ptrdiff_t>(prefixes.size());
  std::vector<PartitionTable> partial(prefixes.size());
  std::vector<std::vector<LogSum>> partial_inf(prefixes.size()), partial_sup(prefixes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < tasks; ++k) {
    PartitionWalker walker(system, family, weights, n_max);
    walker.walk(prefixes[k], 2);
    partial[k].word_count.assign(n_max, 0);
    partial_inf[k].assign(n_max, LogSum{});
    partial_sup[k].assign(n_max, LogSum{});
    walker.merge_into(partial[k], partial_inf[k], partial_sup[k]);
  }
  // Reduce in prefix order so the result does not depend on scheduling.
  for (std::size_t k = 0; k < prefixes.size(); ++k)
    for (std::size_t n = 1; n < n_max; ++n) {
      inf[n].merge(partial_inf[k][n]);
      sup[n].merge(partial_sup[k][n]);
      table.word_count[n] += partial[k].word_count[n];
    }
  return finish(n_max, inf, sup, std::move(table));
}

// ---------------------------------------------------------------------------

std::vector<double> chebyshev_nodes(const Interval& iv, std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double xi = std::cos((2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(m)));
    x[k] = iv.midpoint() + 0.5 * iv.length() * xi;
  }
  return x;
}

std::vector<double> barycentric_weights(std::size_t m) {
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = (2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(m));
    w[k] = ((k % 2 == 0) ? 1.0 : -1.0) * std::sin(angle);
  }
  return w;
}

void lagrange_row(const std::vector<double>& nodes, const std::vector<double>& weights, double z, double* out) {
  const std::size_t m = nodes.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (z == nodes[k]) {
      for (std::size_t j = 0; j < m; ++j) out[j] = (j == k) ? 1.0 : 0.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    out[k] = weights[k] / (z - nodes[k]);
    denom += out[k];
  }
  for (std::size_t k = 0; k < m; ++k) out[k] /= denom;
}

CollocationGrid make_collocation_grid(const System& system, std::size_t nodes) {
  if (nodes == 0) throw DomainError("collocation needs at least one node");
  CollocationGrid grid;
  grid.nodes = nodes;
  if (system.is_multigraph_induced()) {
    grid.mode = CollocationMode::vertex;
    for (const auto& v : system.vertices()) grid.pieces.push_back(v.interval);
  } else {
    grid.mode = CollocationMode::edge;
    for (std::size_t e = 0; e < system.num_edges(); ++e) grid.pieces.push_back(system.domain(e));
  }
  for (const auto& piece : grid.pieces) {
    const auto x = chebyshev_nodes(piece, nodes);
    grid.points.insert(grid.points.end(), x.begin(), x.end());
  }
  return grid;
}

namespace {

class CollocationAssembler {
 public:
  CollocationAssembler(const System& system, const PotentialFamily& family, const QTWeights& weights,
                       const CollocationGrid& grid)
      : system_(system), family_(family), weights_(weights), grid_(grid), bary_(barycentric_weights(grid.nodes)) {
    for (std::size_t s = 0; s < grid.pieces.size(); ++s)
      piece_nodes_.emplace_back(grid.points.begin() + static_cast<std::ptrdiff_t>(s * grid.nodes),
                                grid.points.begin() + static_cast<std::ptrdiff_t>((s + 1) * grid.nodes));
    if (grid.mode == CollocationMode::vertex) {
      incoming_.resize(grid.pieces.size());
      for (std::size_t e = 0; e < system.num_edges(); ++e) incoming_[system.target_vertex(e)].push_back(e);
    }
  }

  std::size_t size() const { return grid_.points.size(); }

  /// Fills row r of the collocation matrix.
  void row(std::size_t r, Eigen::MatrixXd& mat) const {
    const std::size_t m = grid_.nodes;
    const std::size_t state = r / m;
    const double x = grid_.points[r];
    std::vector<double> basis(m);
    auto add = [&](std::size_t edge, double at, std::size_t column_state) {
      const MapValue d = system_.apply(edge, at);
      const double w = std::exp(weights_.q * family_.psi(edge, at) + weights_.exponent * std::log(d.abs_derivative));
      lagrange_row(piece_nodes_[column_state], bary_, d.value, basis.data());
      for (std::size_t j = 0; j < m; ++j) mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(column_state * m + j)) += w * basis[j];
    };
    if (grid_.mode == CollocationMode::vertex) {
      for (std::size_t e : incoming_[state]) add(e, x, system_.source_vertex(e));
    } else {
      // (L g)_f(y) = sum_{e : A_ef = 1} exp(f_e(phi_f y)) g_e(phi_f y)
      const double z = system_.apply(state, x).value;
      for (std::size_t e = 0; e < system_.num_edges(); ++e) {
        if (!system_.admissible(e, state)) continue;
        const MapValue d = system_.apply(e, z);
        const double w = std::exp(weights_.q * family_.psi(e, z) + weights_.exponent * std::log(d.abs_derivative));
        lagrange_row(piece_nodes_[e], bary_, z, basis.data());
        for (std::size_t j = 0; j < m; ++j) mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e * m + j)) += w * basis[j];
      }
    }
  }

 private:
  const System& system_;
  const PotentialFamily& family_;
  QTWeights weights_;
  const CollocationGrid& grid_;
  std::vector<double> bary_;
  std::vector<std::vector<double>> piece_nodes_;
  std::vector<std::vector<std::size_t>> incoming_;
};

}  // namespace

Eigen::MatrixXd collocation_matrix_serial(const System& system, const PotentialFamily& family,
                                          const QTWeights& weights, const CollocationGrid& grid) {
  CollocationAssembler assembler(system, family, weights, grid);
  const auto n = static_cast<Eigen::Index>(assembler.size());
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < assembler.size(); ++r) assembler.row(r, mat);
  return mat;
}

Eigen::MatrixXd collocation_matrix_parallel(const System& system, const PotentialFamily& family,
                                            const QTWeights& weights, const CollocationGrid& grid) {
  CollocationAssembler assembler(system, family, weights, grid);
  const auto n = static_cast<Eigen::Index>(assembler.size());
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(assembler.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) assembler.row(static_cast<std::size_t>(r), mat);
  return mat;
}

}  // namespace mfa::kernels
