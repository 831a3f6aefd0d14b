#pragma once

// Real-space observables along a principal axis through the trap centre.
//
// For the ideal gas the one-body density matrix is diagonal in oscillator
// eigenstates, so on the axis cut
//   numerator(x)   = sum_lambda N_lambda (-1)^{lambda_a} phi_{lambda_a}(x)^2 prod_o phi_{lambda_o}(0)^2
//   denominator(x) = sum_lambda N_lambda             phi_{lambda_a}(x)^2 prod_o phi_{lambda_o}(0)^2
// and g1(-x, x) = numerator / denominator. The denominator is the density.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bosegas/canonical.hpp"
#include "bosegas/errors.hpp"
#include "bosegas/trap_spectrum.hpp"

namespace bosegas {

inline constexpr int default_max_mode_index = 5000;

namespace detail {

// Rescaling keeps the unnormalised recurrence inside double range; the
// Gaussian envelope is carried as a separate logarithm.
inline constexpr double ladder_rescale = 1e150;

}  // namespace detail

/// phi_0(x), ..., phi_K(x) of the 1D oscillator with K = out.size() - 1.
/// Normalised three-term recurrence
///   phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1},
/// run on psi = phi e^{x^2/2} pi^{1/4} with periodic rescaling, so large k and
/// large |x| do not underflow through the Gaussian seed.
inline void mode_function_ladder(double x, std::span<double> out) {
  if (out.empty()) return;
  const double log_envelope0 = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double log_scale = log_envelope0;
  auto emit = [&](double psi) {
    if (psi == 0.0) return 0.0;
    if (log_scale > -700.0 && log_scale < 700.0) return psi * std::exp(log_scale);
    const double v = std::exp(log_scale + std::log(std::abs(psi)));
    return psi < 0.0 ? -v : v;
  };
  double prev = 0.0;
  double cur = 1.0;
  out[0] = emit(cur);
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double next = x * std::sqrt(2.0 / (kk + 1.0)) * cur - std::sqrt(kk / (kk + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > detail::ladder_rescale) {
      prev /= detail::ladder_rescale;
      cur /= detail::ladder_rescale;
      log_scale += std::log(detail::ladder_rescale);
    }
    out[k + 1] = emit(cur);
  }
}

/// Normalised 1D oscillator eigenfunction phi_k(x).
inline double mode_function(int k, double x, int max_k = default_max_mode_index) {
  if (k < 0 || k > max_k) {
    throw ArgumentError("mode index " + std::to_string(k) + " outside [0, " + std::to_string(max_k) + "]");
  }
  std::vector<double> ladder(static_cast<std::size_t>(k) + 1);
  mode_function_ladder(x, ladder);
  return ladder.back();
}

/// phi_k(0)^2: zero for odd k, pi^{-1/2} binom(k, k/2) / 2^k for even k.
inline std::vector<double> mode_function_at_origin_squared(int max_k) {
  std::vector<double> c(static_cast<std::size_t>(max_k) + 1, 0.0);
  c[0] = 1.0 / std::sqrt(std::numbers::pi);
  for (int k = 2; k <= max_k; k += 2) c[k] = c[k - 2] * (k - 1.0) / k;
  return c;
}

/// Symmetric uniform grid on [-extent, extent] with an odd point count; the
/// centre point is exactly 0 and x(-i) = -x(i) bit for bit.
class AxisGrid {
public:
  AxisGrid(Axis axis, double extent, int count) : axis_(axis), extent_(extent), count_(count) {
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ArgumentError("grid extent must be positive");
    if (count < 3 || count % 2 == 0) throw ArgumentError("grid point count must be odd and at least 3");
  }

  Axis axis() const { return axis_; }
  double extent() const { return extent_; }
  int count() const { return count_; }
  int center() const { return (count_ - 1) / 2; }
  double spacing() const { return extent_ / center(); }
  double point(int i) const { return static_cast<double>(i - center()) * spacing(); }

  std::vector<double> points() const {
    std::vector<double> p(static_cast<std::size_t>(count_));
    for (int i = 0; i < count_; ++i) p[i] = point(i);
    return p;
  }

  /// Same spacing, extent scaled by an integer factor.
  AxisGrid widened(int factor) const { return AxisGrid(axis_, extent_ * factor, (count_ - 1) * factor + 1); }

private:
  Axis axis_;
  double extent_;
  int count_;
};

/// Default grid: extent 1.5 x max(sqrt(2T/omega_a), 3) oscillator lengths of
/// the axis, 2001 points.
inline AxisGrid default_grid(const TrapGeometry& g, Axis axis, double temperature, int count = 2001) {
  const double w = g.omega(axis);
  const double radius = std::max(std::sqrt(2.0 * temperature / w), 3.0) / std::sqrt(w);
  return AxisGrid(axis, 1.5 * radius, count);
}

namespace detail {

/// Distance between the two half-maximum crossings nearest the centre, using
/// values[center] as the reference maximum. nullopt if a side never crosses.
inline std::optional<double> half_max_width(std::span<const double> values, const AxisGrid& grid) {
  const int c = grid.center();
  const double half = 0.5 * values[c];
  auto crossing = [&](int step) -> std::optional<double> {
    for (int i = c; i + step >= 0 && i + step < grid.count(); i += step) {
      const double a = values[i];
      const double b = values[i + step];
      if (b <= half) {
        const double t = (a - half) / (a - b);
        return grid.point(i) + t * (grid.point(i + step) - grid.point(i));
      }
    }
    return std::nullopt;
  };
  const auto right = crossing(+1);
  const auto left = crossing(-1);
  if (!right || !left) return std::nullopt;
  return *right - *left;
}

}  // namespace detail

/// Full width at half maximum of a curve peaked at the grid centre, with
/// linear interpolation between the bracketing points.
inline double fwhm(std::span<const double> values, const AxisGrid& grid) {
  if (values.size() != static_cast<std::size_t>(grid.count())) {
    throw ArgumentError("curve and grid sizes differ");
  }
  const double peak = values[grid.center()];
  if (!(peak > 0.0)) throw ArgumentError("curve must be positive at the centre");
  const double mx = *std::max_element(values.begin(), values.end());
  if (mx > peak * (1.0 + 1e-9)) throw ArgumentError("curve maximum is not at the grid centre");
  const auto w = detail::half_max_width(values, grid);
  if (!w) throw ExtentError("no half-maximum crossing inside the grid extent " + std::to_string(grid.extent()));
  return *w;
}

struct CorrelationProfile {
  AxisGrid grid;
  std::vector<double> g1;
  std::vector<double> density;
  double coherence_length = 0.0;  // +inf when g1 stays above 1/2 across the whole cloud
  double cloud_width = 0.0;
  double density_integral = 0.0;  // sum density * dx over the cut
};

struct ProfileOptions {
  int max_widenings = 4;
  // g1 without a half-maximum crossing counts as coherent across the cloud
  // once the density at the grid edge is below this fraction of the peak.
  double edge_density_fraction = 1e-10;
  // If false, a g1 without crossing reports coherence_length = +inf without
  // widening the grid for it.
  bool widen_for_coherence = true;
};

namespace detail {

/// W_k = sum over modes with lambda_axis = k of N_lambda prod_o phi_{lambda_o}(0)^2.
inline std::vector<double> axis_weights(const OccupationSpectrum& spec, Axis axis) {
  const auto& g = spec.geometry();
  const int a = axis_index(axis);
  const double e_max = spec.levels().back().energy;
  std::vector<int> others;
  for (int i = 0; i < g.dimension(); ++i) {
    if (i != a) others.push_back(i);
  }
  // Off-axis even quanta grouped by their energy sum (odd ones vanish at 0).
  std::map<double, double> off_axis{{0.0, 1.0}};
  for (int o : others) {
    const double w = g.omega(o);
    const int k_max = static_cast<int>(e_max / w) + 1;
    const auto c0 = mode_function_at_origin_squared(k_max);
    std::map<double, double> next;
    for (const auto& [e_prev, weight] : off_axis) {
      for (int k = 0; k <= k_max; k += 2) {
        const double e = e_prev + w * k;
        if (e > e_max) break;
        next[e] += weight * c0[k];
      }
    }
    off_axis = std::move(next);
  }
  const double wa = g.omega(a);
  const int k_max = static_cast<int>(e_max / wa);
  std::vector<double> weights(static_cast<std::size_t>(k_max) + 1, 0.0);
  const double tol = 1e-9 * std::max(1.0, e_max);
  for (int k = 0; k <= k_max; ++k) {
    const double ea = wa * k;
    for (const auto& [eo, weight] : off_axis) {
      const double e = ea + eo;
      if (e > e_max + tol) break;
      double occ = 0.0;
      try {
        occ = spec.occupation_at_energy(e);
      } catch (const ArgumentError&) {
        // Only a rounding-boundary mode just above the cutoff can miss.
        if (e < e_max - tol) throw;
      }
      weights[k] += occ * weight;
    }
  }
  while (weights.size() > 1 && weights.back() == 0.0) weights.pop_back();
  return weights;
}

inline void fill_profile(std::span<const double> weights, const AxisGrid& grid, std::vector<double>& g1,
                         std::vector<double>& density) {
  const int n = grid.count();
  const int c = grid.center();
  g1.assign(static_cast<std::size_t>(n), 0.0);
  density.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> ladder(weights.size());
  for (int i = c; i < n; ++i) {
    mode_function_ladder(grid.point(i), ladder);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double t = weights[k] * ladder[k] * ladder[k];
      den += t;
      num += (k % 2 == 0) ? t : -t;
    }
    const double ratio = den > 0.0 ? num / den : 0.0;
    const int mirror = 2 * c - i;
    g1[i] = g1[mirror] = ratio;
    density[i] = density[mirror] = den;
  }
}

}  // namespace detail

/// g1(-x, x) and the density along a principal axis, with FWHM coherence
/// length and cloud width. The grid is widened (same spacing) when the
/// density's half maximum lies outside it.
inline CorrelationProfile g1_profile(const OccupationSpectrum& spec, const AxisGrid& grid,
                                     const ProfileOptions& opt = {}) {
  const auto& g = spec.geometry();
  if (axis_index(grid.axis()) >= g.dimension()) {
    throw ArgumentError("grid axis " + axis_name(grid.axis()) + " is absent in the trap");
  }
  if (spec.captured_fraction() < 1.0 - 1e-6) {
    throw CutoffError("spectrum captures only a fraction " + std::to_string(spec.captured_fraction()) +
                          " of the atoms; g1 needs 1 - 1e-6",
                      spec.captured_fraction());
  }
  const auto weights = detail::axis_weights(spec, grid.axis());

  CorrelationProfile p{grid, {}, {}, 0.0, 0.0, 0.0};
  for (int widen = 0;; ++widen) {
    detail::fill_profile(weights, p.grid, p.g1, p.density);
    const auto width = detail::half_max_width(p.density, p.grid);
    if (!width) {
      if (widen >= opt.max_widenings) {
        throw ExtentError("density half maximum outside grid extent " + std::to_string(p.grid.extent()));
      }
      p.grid = p.grid.widened(2);
      continue;
    }
    const auto coherence = detail::half_max_width(p.g1, p.grid);
    if (!coherence) {
      const double peak = p.density[p.grid.center()];
      const double edge = std::max(p.density.front(), p.density.back());
      if (opt.widen_for_coherence && edge > opt.edge_density_fraction * peak && widen < opt.max_widenings) {
        p.grid = p.grid.widened(2);
        continue;
      }
    }
    p.cloud_width = *width;
    p.coherence_length = coherence ? *coherence : std::numeric_limits<double>::infinity();
    break;
  }
  double integral = 0.0;
  for (double d : p.density) integral += d;
  p.density_integral = integral * p.grid.spacing();
  return p;
}

inline CorrelationProfile g1_profile(const OccupationSpectrum& spec, const TrapGeometry& g, const AxisGrid& grid,
                                     const ProfileOptions& opt = {}) {
  if (!(spec.geometry() == g)) throw ArgumentError("spectrum was built for a different trap");
  return g1_profile(spec, grid, opt);
}

struct TphResult {
  double temperature = 0.0;        // T_ph
  double ground_fraction = 0.0;    // N0(T_ph)/N
  double characteristic_temperature = 0.0;
  bool multiple_roots = false;
  std::vector<std::pair<double, double>> samples;  // (T, l_phi - width) on the scan grid
};

struct TphOptions {
  double bracket_low = 0.05;   // in units of T_c
  double bracket_high = 2.0;   // in units of T_c
  int scan_points = 16;
  double relative_tolerance = 1e-7;
  double cutoff_tolerance = 1e-8;
  int grid_points = 2001;
  std::optional<Axis> axis;    // default: softest axis
};

/// l_phi(T) - cloud_width(T) for the canonical ensemble.
inline double coherence_excess(const TrapGeometry& g, long long n_atoms, double temperature, Axis axis,
                               const TphOptions& opt = {}, double* ground_fraction_out = nullptr) {
  const ThermalState s(n_atoms, temperature);
  const auto table = build_partition_table(g, s);
  const auto cutoff = default_cutoff(g, temperature, static_cast<double>(n_atoms), opt.cutoff_tolerance);
  const auto spec = occupation_spectrum(g, s, cutoff, table);
  if (ground_fraction_out) *ground_fraction_out = spec.ground_occupation() / static_cast<double>(n_atoms);
  ProfileOptions popt;
  popt.widen_for_coherence = false;
  const auto p = g1_profile(spec, default_grid(g, axis, temperature, opt.grid_points), popt);
  // No g1 crossing means l_phi exceeds the grid, which contains the cloud.
  if (!std::isfinite(p.coherence_length)) return 2.0 * p.grid.extent() - p.cloud_width;
  return p.coherence_length - p.cloud_width;
}

/// Temperature at which the coherence length equals the cloud width (canonical
/// ensemble). Scans [0.05, 2] T_c on a log grid for the first sign change of
/// l_phi - width, then bisects in ln T.
inline TphResult find_tph(const TrapGeometry& g, long long n_atoms, const TphOptions& opt = {}) {
  if (n_atoms < 2) throw ArgumentError("find_tph needs at least 2 atoms");
  const Axis axis = opt.axis.value_or(g.softest_axis());
  TphResult r;
  r.characteristic_temperature = characteristic_temperature(g, n_atoms);
  const double lo = opt.bracket_low * r.characteristic_temperature;
  const double hi = opt.bracket_high * r.characteristic_temperature;
  const int m = std::max(opt.scan_points, 2);
  for (int i = 0; i < m; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (m - 1));
    r.samples.emplace_back(t, coherence_excess(g, n_atoms, t, axis, opt));
  }
  int first = -1, changes = 0;
  for (int i = 0; i + 1 < m; ++i) {
    if ((r.samples[i].second > 0.0) != (r.samples[i + 1].second > 0.0)) {
      if (first < 0) first = i;
      ++changes;
    }
  }
  if (first < 0 || r.samples[first].second <= 0.0) {
    std::string msg = "no coherence-length crossing in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "]; sampled (T, l_phi - width):";
    for (const auto& [t, f] : r.samples) msg += " (" + std::to_string(t) + ", " + std::to_string(f) + ")";
    throw RangeError(msg);
  }
  r.multiple_roots = changes > 1;
  double log_lo = std::log(r.samples[first].first);
  double log_hi = std::log(r.samples[first + 1].first);
  while (log_hi - log_lo > opt.relative_tolerance) {
    const double mid = 0.5 * (log_lo + log_hi);
    (coherence_excess(g, n_atoms, std::exp(mid), axis, opt) > 0.0 ? log_lo : log_hi) = mid;
  }
  r.temperature = std::exp(0.5 * (log_lo + log_hi));
  const ThermalState s(n_atoms, r.temperature);
  r.ground_fraction = ground_fraction(build_partition_table(g, s));
  return r;
}

}  // namespace bosegas
