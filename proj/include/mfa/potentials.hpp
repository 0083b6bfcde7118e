#pragma once

// Hoelder weight families Psi, the combined family F = Psi + u Log and the
// two-parameter family F_{q,t} = q F + t Log.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfa/gdms.hpp"

namespace mfa {

struct EdgeConstantPsi {
  std::vector<double> values;
};

/// psi_e(x) = slope_e * x + offset_e
struct AffinePsi {
  std::vector<double> slope;
  std::vector<double> offset;
};

struct CustomPsi {
  std::function<double(std::size_t edge, double x)> eval;
};

using PsiSpec = std::variant<EdgeConstantPsi, AffinePsi, CustomPsi>;

struct HolderMeta {
  double beta = 1.0;
  double v_beta = 0.0;
  double norm = 0.0;  ///< declared sup |psi_e| for custom evaluators
};

/// F = Psi - c + u Log for a fixed system. Value type, immutable once built.
class PotentialFamily {
 public:
  PotentialFamily(const System& system, PsiSpec psi, double u, HolderMeta holder = {});

  /// Psi == 0.
  static PotentialFamily geometric(const System& system, double u);
  /// psi_e = log p_e - u log r_e on an affine system, so f_e = log p_e.
  static PotentialFamily from_probabilities(const System& system, std::span<const double> p, double u);

  double u() const { return u_; }
  double normalization() const { return normalization_; }
  const std::string& normalization_method() const { return normalization_method_; }
  const HolderMeta& holder() const { return holder_; }
  const PsiSpec& psi_spec() const { return psi_; }
  std::size_t num_edges() const { return num_edges_; }
  bool edge_constant() const { return std::holds_alternative<EdgeConstantPsi>(psi_); }

  /// psi_e(x) - c
  double psi(std::size_t e, double x) const;
  /// psi_e - c for edge-constant families.
  double psi_constant(std::size_t e) const;
  /// f_e(x) = psi_e(x) - c + u log|phi_e'(x)|
  double f(const System& system, std::size_t e, double x) const;

  /// sup / inf of psi_e - c over all edges and their domains.
  double sup_psi() const { return sup_psi_; }
  double inf_psi() const { return inf_psi_; }
  /// ||Psi - c||
  double norm() const { return std::max(std::abs(sup_psi_), std::abs(inf_psi_)); }

  PotentialFamily with_normalization(double c, std::string method) const;
  /// Same family with every psi_e shifted by a constant.
  PotentialFamily shifted(double delta) const;

 private:
  void compute_bounds(const System& system);

  PsiSpec psi_;
  double u_ = 1.0;
  double normalization_ = 0.0;
  std::string normalization_method_ = "none";
  HolderMeta holder_;
  std::size_t num_edges_ = 0;
  double sup_psi_ = 0.0;
  double inf_psi_ = 0.0;
  double raw_sup_ = 0.0;
  double raw_inf_ = 0.0;
};

/// Exponent pair of F_{q,t} = q Psi + (qu + t) Log.
struct QTWeights {
  double q = 0.0;
  double t = 0.0;
  double exponent = 0.0;  ///< qu + t
};

/// Throws DomainError unless qu + t > theta (summability of F_{q,t}).
QTWeights make_weights(const System& system, const PotentialFamily& family, double q, double t);

/// S_w(F)(x) = sum_i f_{w_i}(phi_{sigma^i w}(x)), normalization included.
double ergodic_sum(const System& system, const PotentialFamily& family, const Word& w, double x);

/// S_w(F_{q,t})(x) = q (S_w Psi - |w| c) + (qu + t) log|phi_w'(x)|.
double weighted_sum(const System& system, const PotentialFamily& family, const QTWeights& weights,
                    const Word& w, double x);

struct SumBracket {
  double inf_sum = 0.0;
  double sup_sum = 0.0;
};

/// Certified bounds of S_w(F_{q,t}) over X_{t(w)}. Exact for edge-constant psi
/// on affine/Moebius systems.
SumBracket cylinder_sum_bracket(const System& system, const PotentialFamily& family, const QTWeights& weights,
                                const Word& w);
/// Bracket of S_w(F) (q = 1, t = 0).
SumBracket cylinder_sum_bracket(const System& system, const PotentialFamily& family, const Word& w);

struct NormalizeOptions {
  double tolerance = 1e-11;
};

/// Returns the family with its normalization constant chosen so that P(F) = 0
/// (collocation pressure). Throws ConvergenceError when the re-computed
/// pressure misses the tolerance.
PotentialFamily normalize(const System& system, const PotentialFamily& family, NormalizeOptions options = {});

}  // namespace mfa
