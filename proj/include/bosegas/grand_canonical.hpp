#pragma once

// Grand-canonical ideal Bose gas in a harmonic trap.
//
// N(z, T) = z/(1-z) + sum_{lambda != 0} z e^{-beta E}/(1 - z e^{-beta E}).
// The fugacity is carried together with its log-odds u = ln(z/(1-z)) = ln N_0,
// so that 1 - z keeps full relative precision when z is within 1e-15 of 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/numeric.hpp"
#include "bosegas/trap_spectrum.hpp"

namespace bosegas {

class Fugacity {
public:
  static Fugacity from_z(double z) {
    if (!(z > 0.0 && z < 1.0)) throw ArgumentError("fugacity must lie in (0, 1), got " + std::to_string(z));
    return Fugacity(std::log(z) - std::log1p(-z));
  }
  /// u = ln(z/(1-z)); equals ln N_0 of the condensate mode.
  static Fugacity from_log_odds(double u) {
    if (!std::isfinite(u)) throw ArgumentError("fugacity log-odds must be finite");
    return Fugacity(u);
  }
  /// z such that the ground mode holds n0 atoms: z = n0/(1+n0).
  static Fugacity from_condensate(double n0) {
    if (!(n0 > 0.0)) throw ArgumentError("condensate population must be positive");
    return Fugacity(std::log(n0));
  }

  double z() const { return 1.0 / (1.0 + std::exp(-u_)); }
  double one_minus_z() const { return 1.0 / (1.0 + std::exp(u_)); }
  double log_odds() const { return u_; }
  /// z/(1-z), the ground-mode population.
  double condensate() const { return std::exp(u_); }

private:
  explicit Fugacity(double u) : u_(u) {
    if (!(z() < 1.0)) throw ArgumentError("fugacity rounds to 1; log-odds too large");
  }
  double u_;
};

/// Bose occupation z e^{-x}/(1 - z e^{-x}) of a mode with x = beta*eps > 0.
inline double bose_occupation(const Fugacity& f, double x) {
  // 1 - z e^{-x} = (1 - z) - z expm1(-x), free of cancellation.
  return f.z() * std::exp(-x) / (f.one_minus_z() - f.z() * std::expm1(-x));
}

struct GrandCanonicalState {
  Fugacity fugacity;
  double temperature;
  TrapGeometry geometry;
  double n_atoms_target;
};

namespace detail {

/// Excited levels below a cutoff plus the weight of the discarded tail.
class ExcitedSum {
public:
  ExcitedSum(const TrapGeometry& g, const SpectrumCutoff& c) : geometry_(g), cutoff_(c) {
    if (!(c.max_energy > 0.0)) throw ArgumentError("cutoff max_energy must be positive");
    levels_ = energy_levels(g, c.max_energy, c.max_entries);
  }

  /// sum over excited modes of the Bose occupation, including the tail
  /// correction z * sum_{eps > cutoff} e^{-beta eps}.
  double operator()(const Fugacity& f, double temperature) const {
    const double beta = 1.0 / temperature;
    double sum = 0.0;
    double boltzmann = 0.0;
    for (const auto& l : levels_) {
      const double x = beta * l.energy;
      boltzmann += static_cast<double>(l.degeneracy) * std::exp(-x);
      if (l.energy > 0.0) sum += static_cast<double>(l.degeneracy) * bose_occupation(f, x);
    }
    const double tail = std::exp(single_particle_log_z(geometry_, beta)) - boltzmann;
    if (tail > 0.0) sum += f.z() * tail;
    if (!std::isfinite(sum)) throw NumericalError("non-finite excited-mode sum");
    return sum;
  }

  double max_energy() const { return cutoff_.max_energy; }

private:
  TrapGeometry geometry_;
  SpectrumCutoff cutoff_;
  std::vector<EnergyLevel> levels_;
};

}  // namespace detail

inline double atom_number(const TrapGeometry& g, const Fugacity& f, double temperature,
                          const SpectrumCutoff& cutoff) {
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  return f.condensate() + detail::ExcitedSum(g, cutoff)(f, temperature);
}

inline double atom_number(const TrapGeometry& g, double z, double temperature, const SpectrumCutoff& cutoff) {
  return atom_number(g, Fugacity::from_z(z), temperature, cutoff);
}

/// Fugacity reproducing n_atoms at temperature T; bisection on u = ln(z/(1-z)).
inline GrandCanonicalState solve_fugacity(const TrapGeometry& g, double n_atoms, double temperature,
                                          const SpectrumCutoff& cutoff) {
  if (!(n_atoms > 0.0)) throw ArgumentError("target atom number must be positive");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  const detail::ExcitedSum excited(g, cutoff);
  auto number = [&](double u) {
    const auto f = Fugacity::from_log_odds(u);
    return f.condensate() + excited(f, temperature);
  };
  // N(u) >= e^u, so u = ln N is an upper bracket.
  double hi = std::log(n_atoms);
  double lo = hi - 1.0;
  for (int i = 0; number(lo) >= n_atoms; ++i) {
    if (i > 200) throw NumericalError("no lower fugacity bracket");
    lo -= std::max(1.0, std::abs(lo));
  }
  double mid = hi;
  double n_mid = number(hi);
  for (int it = 0; it < 400; ++it) {
    if (std::abs(n_mid / n_atoms - 1.0) <= 1e-10) break;
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    n_mid = number(mid);
    if (!std::isfinite(n_mid)) throw NumericalError("non-finite atom number during fugacity solve");
    (n_mid < n_atoms ? lo : hi) = mid;
  }
  if (std::abs(n_mid / n_atoms - 1.0) > 1e-10) {
    throw NumericalError("fugacity solve did not reach relative tolerance 1e-10");
  }
  return {Fugacity::from_log_odds(mid), temperature, g, n_atoms};
}

inline GrandCanonicalState solve_fugacity(const TrapGeometry& g, double n_atoms, double temperature,
                                          double tol = 1e-12) {
  return solve_fugacity(g, n_atoms, temperature, default_cutoff(g, temperature, n_atoms, tol));
}

enum class GcMode { closed_form, exact };

inline std::string to_string(GcMode m) { return m == GcMode::closed_form ? "closed-form" : "exact"; }

struct GcTemperature {
  Fugacity fugacity;
  double temperature;
  GcMode mode;
};

/// Thermodynamic-limit temperature with N_0 = C N held fixed:
/// 2D/3D: T = (N(1-C)/zeta(D))^{1/D}; 1D: T = N(1-C)/ln(CN+1); times the
/// geometric-mean frequency.
inline double closed_form_temperature(const TrapGeometry& g, double n_atoms, double fraction) {
  const double n_excited = n_atoms * (1.0 - fraction);
  const double w = g.geometric_mean_frequency();
  switch (g.dimension()) {
    case 1: return w * n_excited / std::log1p(fraction * n_atoms);
    case 2: return w * std::sqrt(n_excited / numeric::zeta2);
    default: return w * std::cbrt(n_excited / numeric::zeta3);
  }
}

/// z = CN/(1+CN) and the temperature at which N(z, T) = N. Closed-form mode
/// uses the thermodynamic-limit formulas; exact mode solves the full
/// atom-number equation for T with z held strictly below 1.
inline GcTemperature temperature_for_fraction_gc(const TrapGeometry& g, double n_atoms, double fraction,
                                                 GcMode mode = GcMode::closed_form, double tol = 1e-12) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("condensate fraction must lie in (0, 1)");
  if (!(n_atoms > 0.0)) throw ArgumentError("atom number must be positive");
  const auto f = Fugacity::from_condensate(fraction * n_atoms);
  const double t_cf = closed_form_temperature(g, n_atoms, fraction);
  if (mode == GcMode::closed_form) return {f, t_cf, mode};

  const double target = n_atoms * (1.0 - fraction);
  double lo = 0.8 * t_cf, hi = 1.25 * t_cf;
  auto make_sum = [&](double t_max) { return detail::ExcitedSum(g, default_cutoff(g, t_max, n_atoms, tol)); };
  auto excited = make_sum(hi);
  for (int i = 0; excited(f, lo) > target; ++i) {
    if (i > 60) throw RangeError("no lower temperature bracket in the grand-canonical solve");
    lo *= 0.5;
  }
  for (int i = 0; excited(f, hi) < target; ++i) {
    if (i > 60) throw RangeError("no upper temperature bracket in the grand-canonical solve");
    hi *= 2.0;
    excited = make_sum(hi);
  }
  double mid = hi;
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-14; ++it) {
    mid = 0.5 * (lo + hi);
    const double n = excited(f, mid);
    if (std::abs(n / target - 1.0) <= 1e-12) break;
    (n < target ? lo : hi) = mid;
  }
  return {f, mid, mode};
}

/// N_eps/N_0 = [z e^{-beta eps}/(1 - z e^{-beta eps})] (1-z)/z.
inline double occupation_ratio_gc(const Fugacity& f, double temperature, double energy) {
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  if (!(energy > 0.0)) throw ArgumentError("mode energy must be positive for an occupation ratio");
  const double x = energy / temperature;
  if (!(f.z() * std::exp(-x) < 1.0)) throw DomainError("z e^{-beta eps} >= 1: unphysical occupation");
  return bose_occupation(f, x) / f.condensate();
}

/// Sticking ratio N_1/N_0, with the first excited energy set by the smallest
/// trap frequency.
inline double sticking_ratio_gc(const Fugacity& f, double temperature, const TrapGeometry& g) {
  return occupation_ratio_gc(f, temperature, g.min_frequency());
}

inline double sticking_ratio_gc(double z, double temperature, const TrapGeometry& g) {
  if (!(z > 0.0 && z < 1.0)) throw DomainError("fugacity must lie in (0, 1)");
  return sticking_ratio_gc(Fugacity::from_z(z), temperature, g);
}

inline double sticking_ratio_gc(const GcTemperature& t, const TrapGeometry& g) {
  return sticking_ratio_gc(t.fugacity, t.temperature, g);
}

struct ScalingFit {
  int dimension = 0;
  // D = 2, 3: least-squares fit ln(N1/N0) = slope * ln N + intercept.
  double slope = 0.0;
  double intercept = 0.0;
  // D = 1: p = (N1/N0) ln N is fitted by a constant.
  double mean_product = 0.0;
  double relative_trend_per_decade = 0.0;  // least-squares slope of p vs log10 N over mean(p)
  double max_change_per_decade = 0.0;      // max |p_{i+1}/p_i - 1| per decade between samples
  std::vector<double> ratios;
};

/// Scaling of the closed-form sticking ratio with N at fixed condensate fraction.
inline ScalingFit asymptotic_scaling_exponent(int dimension, std::span<const double> samples, double fraction = 0.2) {
  if (samples.size() < 3) throw ArgumentError("scaling fit needs at least 3 samples");
  if (dimension < 1 || dimension > 3) throw ArgumentError("dimension must be 1, 2 or 3");
  for (double n : samples) {
    if (!(n > 0.0)) throw ArgumentError("sample atom numbers must be positive");
  }
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (std::log10(*mx / *mn) < 4.0 - 1e-9) throw ArgumentError("samples must span at least four decades");

  const auto g = TrapGeometry::isotropic(dimension);
  ScalingFit fit;
  fit.dimension = dimension;
  std::vector<double> xs, ys;
  for (double n : samples) {
    const double r = sticking_ratio_gc(temperature_for_fraction_gc(g, n, fraction), g);
    fit.ratios.push_back(r);
    xs.push_back(std::log(n));
    ys.push_back(dimension == 1 ? r * std::log(n) : std::log(r));
  }
  auto least_squares = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx_ = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx_) * (y[i] - my);
      sxx += (x[i] - mx_) * (x[i] - mx_);
    }
    const double slope = sxy / sxx;
    return std::pair{slope, my - slope * mx_};
  };
  if (dimension == 1) {
    std::vector<double> decades;
    for (double x : xs) decades.push_back(x / std::log(10.0));
    const auto [s, b] = least_squares(decades, ys);
    fit.mean_product = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    fit.relative_trend_per_decade = s / fit.mean_product;
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return xs[a] < xs[c]; });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const double dd = decades[order[i + 1]] - decades[order[i]];
      if (dd <= 0.0) continue;
      const double change = std::abs(ys[order[i + 1]] / ys[order[i]] - 1.0) / dd;
      fit.max_change_per_decade = std::max(fit.max_change_per_decade, change);
    }
  } else {
    const auto [s, b] = least_squares(xs, ys);
    fit.slope = s;
    fit.intercept = b;
  }
  return fit;
}

}  // namespace bosegas
