#pragma once

// Conformal graph directed Markov systems over interval pieces: maps, words,
// cylinder geometry and structural diagnostics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mfa {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
  bool contains(const Interval& other, double slack = 0.0) const {
    return other.lo >= lo - slack && other.hi <= hi + slack;
  }
  bool intersects(const Interval& other) const { return other.lo <= hi && other.hi >= lo; }
};

struct MapValue {
  double value = 0.0;
  double abs_derivative = 0.0;
};

/// x -> ratio * x + shift
struct AffineMap {
  double ratio = 0.0;
  double shift = 0.0;
};

/// x -> (a x + b) / (c x + d)
struct MoebiusMap {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
};

/// Arbitrary C^{1+alpha} map given by a value-and-signed-derivative evaluator.
/// Extrema over intervals are taken on a 33-point grid widened by the declared
/// Lipschitz constant of log|phi'|.
struct CustomMap {
  std::function<std::pair<double, double>(double)> eval;
  double log_derivative_lipschitz = 0.0;
};

using MapKind = std::variant<AffineMap, MoebiusMap, CustomMap>;

/// 2x2 matrix form of an affine or Moebius map; composition is matrix product.
struct MoebiusMatrix {
  long double a = 1.0L;
  long double b = 0.0L;
  long double c = 0.0L;
  long double d = 1.0L;
  /// Product of the factors' determinants; ad - bc cancels badly for long words.
  long double det = 1.0L;

  static MoebiusMatrix identity() { return {}; }
  static MoebiusMatrix from(const AffineMap& m) { return {m.ratio, m.shift, 0.0L, 1.0L, m.ratio}; }
  static MoebiusMatrix from(const MoebiusMap& m) {
    return {m.a, m.b, m.c, m.d, static_cast<long double>(m.a) * m.d - static_cast<long double>(m.b) * m.c};
  }

  /// (*this) o other
  MoebiusMatrix then_inner(const MoebiusMatrix& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d, det * o.det};
  }
  long double determinant() const { return det; }
  double value(double x) const { return static_cast<double>((a * x + b) / (c * x + d)); }
  double abs_derivative(double x) const {
    const long double den = c * x + d;
    const long double det = determinant();
    return static_cast<double>((det < 0 ? -det : det) / (den * den));
  }
};

struct VertexPiece {
  int id = 0;
  Interval interval;
};

struct EdgeMap {
  int id = 0;
  int source = 0;  ///< vertex id i(e); the image lies in this piece
  int target = 0;  ///< vertex id t(e); the map is defined on this piece
  MapKind map;
  double contraction = 0.0;  ///< sup |phi_e'|; filled in on validation when left at 0
};

/// Power-law description of the derivative decay of an infinite parent family:
/// ||phi_n'|| ~ n^{-gamma} (log n)^{-log_exponent}.
struct TailModel {
  double gamma = 2.0;
  double log_exponent = 0.0;
  /// Accumulation points of the first-level images of the parent family.
  std::vector<double> accumulation_points;

  double theta() const { return 1.0 / gamma; }
};

/// Constants (L, alpha) of the Hoelder condition on |phi_e'|.
struct DistortionMeta {
  double lipschitz = 1.0;
  double exponent = 1.0;
};

/// Dense 0/1 edge incidence matrix.
class Incidence {
 public:
  Incidence() = default;
  explicit Incidence(std::size_t n, bool value = true) : n_(n), cells_(n * n, value ? 1 : 0) {}
  static Incidence from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t size() const { return n_; }
  bool operator()(std::size_t e, std::size_t f) const { return cells_[e * n_ + f] != 0; }
  void set(std::size_t e, std::size_t f, bool v) { cells_[e * n_ + f] = v ? 1 : 0; }
  bool all_ones() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Edge positions into System::edges(); edges are stored sorted by id so
/// positional order is id order.
using Word = std::vector<std::size_t>;

struct SystemOptions {
  std::string name;
  std::optional<TailModel> tail;
  std::optional<DistortionMeta> distortion_meta;
  std::optional<double> distortion;  ///< supplied K; skips estimation
};

/// A validated conformal GDMS/IFS on interval pieces. Immutable after
/// construction and safe to share across threads.
class System {
 public:
  System(std::vector<VertexPiece> vertices, std::vector<EdgeMap> edges, Incidence incidence,
         SystemOptions options = {});

  const std::string& name() const { return name_; }
  const std::vector<VertexPiece>& vertices() const { return vertices_; }
  const std::vector<EdgeMap>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  const Incidence& incidence() const { return incidence_; }
  bool admissible(std::size_t e, std::size_t f) const { return incidence_(e, f); }

  std::size_t source_vertex(std::size_t e) const { return source_[e]; }
  std::size_t target_vertex(std::size_t e) const { return target_[e]; }
  /// X_{t(e)}
  const Interval& domain(std::size_t e) const { return vertices_[target_[e]].interval; }
  /// X_{i(e)}
  const Interval& codomain(std::size_t e) const { return vertices_[source_[e]].interval; }
  std::size_t edge_position(int id) const;
  std::size_t vertex_position(int id) const;

  MapValue apply(std::size_t e, double x) const;
  /// Matrix form, or nullopt for custom maps.
  std::optional<MoebiusMatrix> matrix(std::size_t e) const;
  bool has_custom_maps() const { return has_custom_; }
  bool all_affine() const { return all_affine_; }

  /// Single vertex with an all-ones incidence matrix.
  bool is_full_shift() const;
  /// A_{ef} = 1 exactly when t(e) = i(f).
  bool is_multigraph_induced() const;

  /// Eventual contraction rate s: ||phi_w'|| <= prefactor * s^{|w|}.
  double contraction() const { return contraction_; }
  double contraction_prefactor() const { return prefactor_; }
  double diameter() const { return diameter_; }

  const std::optional<TailModel>& tail() const { return tail_; }
  const std::optional<DistortionMeta>& distortion_meta() const { return distortion_meta_; }
  /// Finiteness parameter theta: parent-family value when a tail model is
  /// declared, 0 for genuinely finite systems.
  double theta() const { return tail_ ? tail_->theta() : 0.0; }
  /// Distortion constant K; nullopt when it cannot be certified.
  std::optional<double> distortion() const { return distortion_; }
  double distortion_or_throw() const;

 private:
  std::string name_;
  std::vector<VertexPiece> vertices_;
  std::vector<EdgeMap> edges_;
  Incidence incidence_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::optional<TailModel> tail_;
  std::optional<DistortionMeta> distortion_meta_;
  std::optional<double> distortion_;
  double contraction_ = 0.0;
  double prefactor_ = 1.0;
  double diameter_ = 0.0;
  bool has_custom_ = false;
  bool all_affine_ = true;
};

// ---------------------------------------------------------------------------
// Words and cylinders

void check_admissible(const System& system, const Word& w);

/// phi_w(x) together with |phi_w'(x)| accumulated by the chain rule.
MapValue evaluate_word_map(const System& system, const Word& w, double x);

/// phi_w(X_{t(w)}).
Interval cylinder_interval(const System& system, const Word& w);

struct DerivativeRange {
  double inf = 0.0;
  double sup = 0.0;
};

/// inf and sup of |phi_w'| over X_{t(w)}: exact endpoint extrema for
/// affine/Moebius words, grid plus declared slack otherwise.
DerivativeRange word_derivative_range(const System& system, const Word& w);

/// Number of admissible words of length n (saturates at UINT64_MAX).
std::uint64_t count_words(const System& system, std::size_t n);

inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 22;

/// Visits every admissible word of length n once, in lexicographic edge-id
/// order. Throws ResourceError when count_words(n) exceeds the budget.
void for_each_word(const System& system, std::size_t n,
                   const std::function<void(const Word&)>& visit,
                   std::uint64_t budget = kDefaultWordBudget);

std::vector<Word> enumerate_words(const System& system, std::size_t n,
                                  std::uint64_t budget = kDefaultWordBudget);

// ---------------------------------------------------------------------------
// Diagnostics

enum class Verdict { yes, no, unknown };
const char* to_string(Verdict v);

struct PrimitivityVerdict {
  Verdict verdict = Verdict::unknown;
  std::size_t p = 0;  ///< connecting-word length (A^{p+1} > 0)
  std::vector<Word> witnesses;
};

PrimitivityVerdict check_finitely_primitive(const System& system, std::size_t p_max);

struct OscReport {
  bool ok = true;
  double worst_overlap = 0.0;
};

/// Pairwise overlap of first-level image interiors that share a vertex.
OscReport check_osc(const System& system);

struct BscReport {
  std::optional<double> gap;
  std::string exact;  ///< rational form when computed exactly, e.g. "5/28"
  std::string reason;
};

BscReport check_bsc(const System& system);

struct DistortionEstimate {
  std::optional<double> constant;
  double level_one_ratio = 1.0;  ///< max_e sup|phi_e'| / inf|phi_e'|
  std::string method;
};

DistortionEstimate estimate_distortion_constant(const System& system);

/// max over consecutive edge ids of ||phi_n'|| / ||phi_{n+1}'|| and its inverse.
double norm_comparability_constant(const System& system);

// ---------------------------------------------------------------------------
// Builtins

struct BuiltinParams {
  std::size_t truncation = 2;
  double eps = -0.25;
  std::vector<double> ratios{1.0 / 3.0, 1.0 / 3.0};
  std::vector<double> gaps;
};

/// cf_full: phi_n(x) = 1/(n+x), n = 1..N on [0,1].
/// cf_no_one: phi_n(x) = 1/(n+x), n = 2..N on [eps, 3/4].
/// affine_cantor: orientation-preserving similarities with disjoint images.
System builtin_system(const std::string& name, const BuiltinParams& params = {});

}  // namespace mfa
