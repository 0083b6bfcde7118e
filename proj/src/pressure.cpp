#include "mfa/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mfa/errors.hpp"
#include "mfa/kernels.hpp"

namespace mfa {

const char* to_string(PressureMethod m) {
  return m == PressureMethod::partition ? "partition" : "collocation";
}

double PartitionSum::z_inf() const { return std::exp(log_z_inf); }
double PartitionSum::z_sup() const { return std::exp(log_z_sup); }

namespace {

kernels::PartitionTable run_partition(const System& system, const PotentialFamily& family, const QTWeights& w,
                                      std::size_t n_max, std::uint64_t budget, Execution exec) {
  return exec == Execution::parallel ? kernels::partition_table_parallel(system, family, w, n_max, budget)
                                     : kernels::partition_table_serial(system, family, w, n_max, budget);
}

}  // namespace

PartitionSum partition_sum(const System& system, const PotentialFamily& family, double q, double t, std::size_t n,
                           std::uint64_t budget, Execution exec) {
  const QTWeights w = make_weights(system, family, q, t);
  const auto table = run_partition(system, family, w, n, budget, exec);
  return {table.log_z_inf[n - 1], table.log_z_sup[n - 1], table.word_count[n - 1]};
}

PressureEstimate pressure_bracket(const System& system, const PotentialFamily& family, double q, double t,
                                  std::size_t n_max, std::uint64_t budget, Execution exec) {
  if (!system.is_full_shift())
    throw UnsupportedStructureError("certified partition brackets need a full-shift IFS");
  const QTWeights w = make_weights(system, family, q, t);
  const auto table = run_partition(system, family, w, n_max, budget, exec);

  PressureEstimate est;
  est.q = q;
  est.t = t;
  est.method = PressureMethod::partition;
  est.level = n_max;
  double upper = std::numeric_limits<double>::infinity();
  double lower = -upper;
  for (std::size_t n = 1; n <= n_max; ++n) {
    upper = std::min(upper, table.log_z_sup[n - 1] / static_cast<double>(n));
    lower = std::max(lower, table.log_z_inf[n - 1] / static_cast<double>(n));
    est.upper_by_n.push_back(upper);
    est.lower_by_n.push_back(lower);
    est.word_count += table.word_count[n - 1];
  }
  est.lower = lower;
  est.upper = upper;
  est.value = 0.5 * (lower + upper);
  return est;
}

PressureEstimate pressure_partition_heuristic(const System& system, const PotentialFamily& family, double q,
                                              double t, std::size_t n_max, std::uint64_t budget) {
  const QTWeights w = make_weights(system, family, q, t);
  std::size_t n = n_max;
  while (n > 1) {
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= n; ++k) total += std::min(count_words(system, k), budget + 1);
    if (total <= budget) break;
    --n;
  }
  const auto table = kernels::partition_table_parallel(system, family, w, n, budget);
  PressureEstimate est;
  est.q = q;
  est.t = t;
  est.method = PressureMethod::partition;
  est.level = n;
  est.value = table.log_z_sup[n - 1] / static_cast<double>(n);
  for (auto c : table.word_count) est.word_count += c;
  return est;
}

namespace {

LeadingEigen iterate(const Eigen::MatrixXd& a, bool transpose, double tolerance, std::size_t max_iterations) {
  const auto n = a.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  double lambda = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd w = transpose ? Eigen::VectorXd(a.transpose() * v) : Eigen::VectorXd(a * v);
    // Keep the iterate in the positive cone's orientation.
    const double sum = w.sum();
    const double scale = w.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConvergenceError("power iteration collapsed");
    const double next = (sum < 0 ? -scale : scale);
    w /= next;
    const bool done = it > 1 && std::abs(next - lambda) <= tolerance * std::abs(next) &&
                      (w - v).cwiseAbs().maxCoeff() <= 1e3 * tolerance;
    lambda = next;
    v = std::move(w);
    if (done) {
      LeadingEigen out;
      out.value = lambda;
      out.iterations = it;
      const Eigen::VectorXd r = (transpose ? Eigen::VectorXd(a.transpose() * v) : Eigen::VectorXd(a * v)) - lambda * v;
      out.residual = r.cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
      out.vector = std::move(v);
      return out;
    }
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iterations) + " steps");
}

bool single_signed(const Eigen::VectorXd& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  const double slack = 1e-8 * scale;
  return v.minCoeff() >= -slack || v.maxCoeff() <= slack;
}

/// Largest real positive eigenvalue with a one-signed eigenvector, from a dense
/// eigensolve. Collocation of strongly non-normal operators can produce
/// spurious eigenvalues of larger modulus than the Perron root.
LeadingEigen perron_by_eigensolve(const Eigen::MatrixXd& a) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolve failed");
  const auto values = es.eigenvalues();
  const auto vectors = es.eigenvectors();
  double best = 0.0;
  Eigen::Index pick = -1;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double re = values[i].real();
    if (!(re > best) || std::abs(values[i].imag()) > 1e-12 * re) continue;
    const Eigen::VectorXd v = vectors.col(i).real();
    if (!single_signed(v)) continue;
    best = re;
    pick = i;
  }
  if (pick < 0) throw ConvergenceError("no positive eigenvalue with a one-signed eigenvector");
  LeadingEigen out;
  out.value = best;
  out.vector = vectors.col(pick).real();
  out.vector /= out.vector.sum() < 0 ? -out.vector.cwiseAbs().maxCoeff() : out.vector.cwiseAbs().maxCoeff();
  out.residual = (a * out.vector - best * out.vector).cwiseAbs().maxCoeff();
  return out;
}

constexpr Eigen::Index kMaxDenseEigensolve = 4096;

}  // namespace

LeadingEigen power_iteration(const Eigen::MatrixXd& matrix, double tolerance, std::size_t max_iterations) {
  return iterate(matrix, false, tolerance, max_iterations);
}

LeadingEigen left_power_iteration(const Eigen::MatrixXd& matrix, double tolerance, std::size_t max_iterations) {
  return iterate(matrix, true, tolerance, max_iterations);
}

PressureEstimate pressure_collocation(const System& system, const PotentialFamily& family, double q, double t,
                                      std::size_t nodes, const CollocationOptions& options) {
  const QTWeights w = make_weights(system, family, q, t);
  const auto grid = kernels::make_collocation_grid(system, nodes);
  const Eigen::MatrixXd l = options.exec == Execution::parallel
                                ? kernels::collocation_matrix_parallel(system, family, w, grid)
                                : kernels::collocation_matrix_serial(system, family, w, grid);
  LeadingEigen eig;
  bool perron = false;
  try {
    eig = power_iteration(l, options.power_tolerance, options.max_iterations);
    perron = eig.value > 0.0 && single_signed(eig.vector);
  } catch (const ConvergenceError&) {
    if (l.rows() > kMaxDenseEigensolve) throw;
  }
  if (!perron) {
    if (l.rows() > kMaxDenseEigensolve) throw ConvergenceError("leading eigenvalue is not a Perron root");
    eig = perron_by_eigensolve(l);
  }
  PressureEstimate est;
  est.q = q;
  est.t = t;
  est.value = std::log(eig.value);
  est.method = PressureMethod::collocation;
  est.level = nodes;
  est.eigen_residual = eig.residual / eig.value;
  return est;
}

PressureEstimate pressure(const System& system, const PotentialFamily& family, double q, double t,
                          const CollocationOptions& options) {
  std::size_t m = options.nodes;
  PressureEstimate current = pressure_collocation(system, family, q, t, m, options);
  while (2 * m <= options.max_nodes) {
    m *= 2;
    PressureEstimate finer = pressure_collocation(system, family, q, t, m, options);
    const bool agree = std::abs(finer.value - current.value) <= options.agreement;
    current = std::move(finer);
    if (agree) break;
  }
  return current;
}

double finiteness_parameter(const System& system) { return system.theta(); }

RegularityVerdict check_cofinite_regularity(const System& system) {
  RegularityVerdict v;
  if (!system.tail()) {
    v.verdict = Verdict::yes;
    v.reason = "finite alphabet";
    return v;
  }
  const auto& tail = *system.tail();
  // sum_n ||phi_n'||^theta ~ sum_n n^{-1} (log n)^{-log_exponent * theta}
  const double log_power = tail.log_exponent * tail.theta();
  std::ostringstream os;
  os << "theta-series ~ sum n^-1 (log n)^-" << log_power;
  if (log_power <= 1.0) {
    v.verdict = Verdict::yes;
    os << " diverges";
  } else {
    v.verdict = Verdict::no;
    os << " converges";
  }
  v.reason = os.str();
  return v;
}

}  // namespace mfa
