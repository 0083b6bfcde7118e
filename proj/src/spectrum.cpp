#include "mfa/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mfa/errors.hpp"
#include "mfa/format.hpp"

namespace mfa {

void QGrid::validate() const {
  if (!(q_min < q_max)) throw ParameterError("q grid needs q_min < q_max");
  if (steps < 2) throw ParameterError("q grid needs at least 2 steps");
}

std::vector<double> QGrid::values() const {
  validate();
  std::vector<double> q(steps);
  const double h = (q_max - q_min) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) q[i] = q_min + h * static_cast<double>(i);
  q.back() = q_max;
  return q;
}

SpectrumCurve spectrum_curve(const System& system, const PotentialFamily& family, const QGrid& grid,
                             const SolverOptions& options) {
  const auto q = grid.values();
  TemperatureCurve tc = temperature_curve(system, family, q, options, true);
  SpectrumCurve curve;
  curve.points = std::move(tc.points);
  curve.failures = std::move(tc.failures);
  curve.grid = grid;
  curve.system_name = system.name();
  curve.theta = system.theta();
  curve.u = family.u();
  if (!curve.points.empty()) {
    curve.alpha_min = std::numeric_limits<double>::infinity();
    curve.alpha_max = -curve.alpha_min;
    for (const auto& p : curve.points) {
      curve.alpha_min = std::min(curve.alpha_min, p.alpha_grad);
      curve.alpha_max = std::max(curve.alpha_max, p.alpha_grad);
    }
  }
  return curve;
}

double legendre_check(const SpectrumCurve& curve) {
  double worst = 0.0;
  const auto& pts = curve.points;
  if (pts.size() < 3) return worst;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i)
    worst = std::max(worst, std::abs(pts[i].f_value - (pts[i].T + pts[i].q * pts[i].alpha_fd)));
  return worst;
}

ConvexityReport convexity_report(const SpectrumCurve& curve, double tolerance) {
  ConvexityReport r;
  r.tolerance = tolerance;
  r.min_t_second_difference = std::numeric_limits<double>::infinity();
  r.min_f_concavity_gap = std::numeric_limits<double>::infinity();
  const auto& p = curve.points;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double h0 = p[i].q - p[i - 1].q;
    const double h1 = p[i + 1].q - p[i].q;
    if (std::abs(h0 - h1) <= 1e-9 * std::max(1.0, std::abs(h0))) {
      const double d2 = p[i - 1].T - 2.0 * p[i].T + p[i + 1].T;
      r.min_t_second_difference = std::min(r.min_t_second_difference, d2);
      if (d2 < -tolerance) ++r.t_violations;
    }
    const double a0 = p[i - 1].alpha_grad, a1 = p[i].alpha_grad, a2 = p[i + 1].alpha_grad;
    if (a2 == a0) continue;
    const double chord = p[i - 1].f_value + (p[i + 1].f_value - p[i - 1].f_value) * (a1 - a0) / (a2 - a0);
    const double gap = p[i].f_value - chord;
    r.min_f_concavity_gap = std::min(r.min_f_concavity_gap, gap);
    if (gap < -tolerance) ++r.f_violations;
  }
  if (!std::isfinite(r.min_t_second_difference)) r.min_t_second_difference = 0.0;
  if (!std::isfinite(r.min_f_concavity_gap)) r.min_f_concavity_gap = 0.0;
  return r;
}

void export_curve(const SpectrumCurve& curve, std::ostream& out) {
  out << kSpectrumHeader << '\n';
  for (const auto& p : curve.points) {
    out << format_real(p.q) << ',' << format_real(p.T) << ',' << format_real(p.alpha_fd) << ','
        << format_real(p.alpha_grad) << ',' << format_real(p.f_value) << ',' << format_real(p.chi) << ','
        << format_real(p.root_residual) << '\n';
  }
}

void export_curve(const SpectrumCurve& curve, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ResourceError("cannot open " + path + " for writing");
  export_curve(curve, file);
  file.flush();
  if (!file) throw ResourceError("failed writing " + path);
}

std::vector<ThermoPoint> parse_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSpectrumHeader) throw ParameterError("unexpected spectrum header");
  std::vector<ThermoPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_real(cell));
    if (v.size() != 7) throw ParameterError("spectrum row needs 7 columns");
    ThermoPoint p;
    p.q = v[0];
    p.T = v[1];
    p.alpha_fd = v[2];
    p.alpha_grad = v[3];
    p.f_value = v[4];
    p.chi = v[5];
    p.root_residual = v[6];
    points.push_back(p);
  }
  return points;
}

}  // namespace mfa
