#pragma once

// Single-particle spectrum of an ideal gas in a harmonic trap.
//
// Units: energies in hbar*omega0, temperatures in hbar*omega0/k_B, lengths in
// sqrt(hbar/(m*omega0)). The zero-point energy is dropped, so the ground mode
// has energy exactly 0 and E(lambda) = sum_i omega_i * lambda_i.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/numeric.hpp"

namespace bosegas {

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr int axis_index(Axis a) { return static_cast<int>(a); }

inline std::string axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

/// Trap frequencies in units of the reference frequency. Axes beyond
/// dimension() are absent and hold the sentinel 0.
class TrapGeometry {
public:
  static TrapGeometry isotropic(int dimension) {
    if (dimension < 1 || dimension > 3) {
      throw ArgumentError("trap dimension must be 1, 2 or 3, got " + std::to_string(dimension));
    }
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int i = 0; i < dimension; ++i) w[i] = 1.0;
    return TrapGeometry(w, dimension);
  }

  static TrapGeometry with_frequencies(std::span<const double> omega) {
    if (omega.empty() || omega.size() > 3) {
      throw ArgumentError("a trap needs 1 to 3 frequencies, got " + std::to_string(omega.size()));
    }
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < omega.size(); ++i) {
      if (!(omega[i] > 0.0) || !std::isfinite(omega[i])) {
        throw ArgumentError("trap frequencies must be finite and strictly positive");
      }
      w[i] = omega[i];
    }
    return TrapGeometry(w, static_cast<int>(omega.size()));
  }

  static TrapGeometry with_frequencies(std::initializer_list<double> omega) {
    return with_frequencies(std::span<const double>(omega.begin(), omega.size()));
  }

  /// 3D trap with omega_x = omega_y = omega_perp and omega_z = aspect * omega_perp.
  static TrapGeometry axially_symmetric(double aspect_ratio, double omega_perp = 1.0) {
    return with_frequencies({omega_perp, omega_perp, aspect_ratio * omega_perp});
  }

  int dimension() const { return dimension_; }

  double omega(int axis) const {
    if (axis < 0 || axis >= dimension_) {
      throw ArgumentError("axis " + std::to_string(axis) + " is absent in a " +
                          std::to_string(dimension_) + "D trap");
    }
    return omega_[axis];
  }
  double omega(Axis a) const { return omega(axis_index(a)); }

  std::span<const double> frequencies() const {
    return std::span<const double>(omega_.data(), static_cast<std::size_t>(dimension_));
  }

  double min_frequency() const {
    auto f = frequencies();
    return *std::min_element(f.begin(), f.end());
  }
  double max_frequency() const {
    auto f = frequencies();
    return *std::max_element(f.begin(), f.end());
  }
  double geometric_mean_frequency() const {
    double log_sum = 0.0;
    for (double w : frequencies()) log_sum += std::log(w);
    return std::exp(log_sum / dimension_);
  }

  /// omega_z / omega_x for 3D traps.
  double aspect_ratio() const {
    if (dimension_ != 3) throw ArgumentError("aspect ratio is defined for 3D traps only");
    return omega_[2] / omega_[0];
  }

  /// Axis with the smallest frequency (lowest index on ties).
  Axis softest_axis() const {
    auto f = frequencies();
    return static_cast<Axis>(std::min_element(f.begin(), f.end()) - f.begin());
  }

  bool operator==(const TrapGeometry&) const = default;

private:
  TrapGeometry(std::array<double, 3> w, int d) : omega_(w), dimension_(d) {}
  std::array<double, 3> omega_;
  int dimension_;
};

/// Oscillator quantum numbers (lambda_x[, lambda_y[, lambda_z]]).
class ModeIndex {
public:
  ModeIndex() = default;
  ModeIndex(std::initializer_list<int> q) : size_(static_cast<int>(q.size())) {
    if (q.size() > 3) throw ArgumentError("a mode has at most three quantum numbers");
    std::copy(q.begin(), q.end(), quanta_.begin());
    check();
  }
  explicit ModeIndex(std::span<const int> q) : size_(static_cast<int>(q.size())) {
    if (q.size() > 3) throw ArgumentError("a mode has at most three quantum numbers");
    std::copy(q.begin(), q.end(), quanta_.begin());
    check();
  }

  static ModeIndex ground(int dimension) {
    ModeIndex m;
    m.size_ = dimension;
    return m;
  }

  int size() const { return size_; }
  int operator[](int i) const { return quanta_[i]; }
  int total() const { return quanta_[0] + quanta_[1] + quanta_[2]; }

  // Lexicographic on quanta (absent entries are 0), then by size.
  auto operator<=>(const ModeIndex&) const = default;

private:
  void check() const {
    for (int i = 0; i < size_; ++i) {
      if (quanta_[i] < 0) throw ArgumentError("quantum numbers must be non-negative");
    }
  }
  std::array<int, 3> quanta_{0, 0, 0};
  int size_ = 0;
};

struct SpectrumCutoff {
  double max_energy = 0.0;
  double tail_tolerance = 1e-12;
  std::size_t max_entries = 10'000'000;
};

struct Mode {
  ModeIndex index;
  double energy;
};

/// A distinct single-particle energy and the number of modes sharing it.
struct EnergyLevel {
  double energy;
  std::uint64_t degeneracy;
};

// Energies are always accumulated left to right over the axes, starting from
// 0.0, so every routine below produces bit-identical energies for the same
// quanta. Level lookups rely on that.
inline double mode_energy(const TrapGeometry& g, const ModeIndex& m) {
  if (m.size() != g.dimension()) {
    throw ArgumentError("mode has " + std::to_string(m.size()) + " quantum numbers but the trap is " +
                        std::to_string(g.dimension()) + "D");
  }
  double e = 0.0;
  for (int i = 0; i < g.dimension(); ++i) e += g.omega(i) * m[i];
  return e;
}

/// Visits every mode with energy <= max_energy in nested-loop order
/// (x outermost). f(const ModeIndex&, double energy).
template <class F>
void for_each_mode(const TrapGeometry& g, double max_energy, F&& f) {
  const auto w = g.frequencies();
  const int d = g.dimension();
  std::array<int, 3> q{0, 0, 0};
  // Recursive lambda over axes; depth is at most 3.
  auto visit = [&](auto&& self, int axis, double e_prev) -> void {
    for (int k = 0;; ++k) {
      const double e = e_prev + w[axis] * k;
      if (e > max_energy) break;
      q[axis] = k;
      if (axis + 1 == d) {
        f(ModeIndex(std::span<const int>(q.data(), static_cast<std::size_t>(d))), e);
      } else {
        self(self, axis + 1, e);
      }
    }
    q[axis] = 0;
  };
  visit(visit, 0, 0.0);
}

/// All modes with energy <= max_energy, sorted by energy, ties broken
/// lexicographically on the quanta.
inline std::vector<Mode> enumerate_modes(const TrapGeometry& g, const SpectrumCutoff& c) {
  if (!(c.max_energy > 0.0)) throw ArgumentError("cutoff max_energy must be positive");
  std::vector<Mode> modes;
  for_each_mode(g, c.max_energy, [&](const ModeIndex& m, double e) {
    if (modes.size() >= c.max_entries) {
      throw ResourceError("mode enumeration exceeds the limit of " + std::to_string(c.max_entries) +
                          " modes (max_energy = " + std::to_string(c.max_energy) + ")");
    }
    modes.push_back({m, e});
  });
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    return a.energy != b.energy ? a.energy < b.energy : a.index < b.index;
  });
  return modes;
}

/// Distinct energies <= max_energy with their degeneracies, sorted ascending.
/// Built axis by axis, so the cost scales with the number of distinct partial
/// sums rather than with the number of modes.
inline std::vector<EnergyLevel> energy_levels(const TrapGeometry& g, double max_energy,
                                              std::size_t max_entries = 10'000'000) {
  if (!(max_energy >= 0.0)) throw ArgumentError("max_energy must be non-negative");
  std::unordered_map<double, std::uint64_t> current{{0.0, 1}};
  for (double w : g.frequencies()) {
    std::unordered_map<double, std::uint64_t> next;
    next.reserve(current.size() * 2);
    for (const auto& [e_prev, deg] : current) {
      for (int k = 0;; ++k) {
        const double e = e_prev + w * k;
        if (e > max_energy) break;
        next[e] += deg;
        if (next.size() > max_entries) {
          throw ResourceError("level enumeration exceeds the limit of " + std::to_string(max_entries) +
                              " distinct energies");
        }
      }
    }
    current = std::move(next);
  }
  std::vector<EnergyLevel> levels;
  levels.reserve(current.size());
  for (const auto& [e, deg] : current) levels.push_back({e, deg});
  std::sort(levels.begin(), levels.end(),
            [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
  return levels;
}

/// The k-th mode (0-based) of the energy-sorted mode list.
inline Mode ranked_mode(const TrapGeometry& g, std::size_t k) {
  // The softest axis alone supplies k+1 modes at or below k * omega_min.
  const double e = static_cast<double>(std::max<std::size_t>(k, 1)) * g.min_frequency();
  auto modes = enumerate_modes(g, {.max_energy = e});
  return modes.at(k);
}

/// ln Z_1(beta) = -sum_i ln(1 - e^{-beta*omega_i}).
inline double single_particle_log_z(const TrapGeometry& g, double beta) {
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  double s = 0.0;
  for (double w : g.frequencies()) s -= numeric::log1mexp(beta * w);
  return s;
}

/// Explicit finite level list standing in for a trap. Used to check the
/// canonical machinery against exhaustive enumeration.
struct ExplicitSpectrum {
  std::vector<double> energies;
};

inline double single_particle_log_z(const ExplicitSpectrum& s, double beta) {
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  numeric::LogSumExp acc;
  for (double e : s.energies) {
    if (e < 0.0) throw ArgumentError("level energies must be non-negative");
    acc.add(-beta * e);
  }
  return acc.value();
}

template <class S>
concept SingleParticleSpectrum = requires(const S& s, double beta) {
  { single_particle_log_z(s, beta) } -> std::convertible_to<double>;
};

/// Hash identifying a spectrum, stored with derived tables.
inline std::size_t fingerprint(const TrapGeometry& g) {
  std::size_t h = std::hash<int>{}(g.dimension());
  for (double w : g.frequencies()) h = h * 1000003u ^ std::hash<double>{}(w);
  return h;
}

inline std::size_t fingerprint(const ExplicitSpectrum& s) {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (double e : s.energies) h = h * 1000003u ^ std::hash<double>{}(e);
  return h;
}

/// Degeneracy scale T_c. 1D: N/ln(2N); 2D: sqrt(N/zeta(2)); 3D: cbrt(N/zeta(3)),
/// times the geometric-mean trap frequency. For isotropic traps that is the
/// textbook formula; for anisotropic traps the geometric mean is a convention.
inline double characteristic_temperature(const TrapGeometry& g, long long n_atoms) {
  if (n_atoms < 2) throw ArgumentError("characteristic temperature needs at least 2 atoms");
  const double n = static_cast<double>(n_atoms);
  const double w = g.geometric_mean_frequency();
  switch (g.dimension()) {
    case 1: return w * n / std::log(2.0 * n);
    case 2: return w * std::sqrt(n / numeric::zeta2);
    default: return w * std::cbrt(n / numeric::zeta3);
  }
}

/// Upper bound on sum over modes with energy > max_energy of 1/(e^{beta*eps}-1),
/// which bounds both the canonical and the grand-canonical occupation tail.
/// Uses sum_{eps>E} e^{-beta eps} <= e^{-beta(1-d)E} Z_1(beta d), minimised over d.
inline double log_occupation_tail_bound(const TrapGeometry& g, double beta, double max_energy) {
  static constexpr std::array<double, 14> fractions{0.995, 0.99, 0.98, 0.95, 0.9, 0.8, 0.7,
                                                    0.5,   0.3,  0.2,  0.1,  0.05, 0.02, 0.01};
  double best = std::numeric_limits<double>::infinity();
  for (double d : fractions) {
    const double lb = -beta * (1.0 - d) * max_energy + single_particle_log_z(g, beta * d);
    best = std::min(best, lb);
  }
  return best - numeric::log1mexp(beta * max_energy);
}

/// Cutoff whose discarded occupation is below tol * n_atoms: starts from
/// T ln(N/tol) + max(omega) and grows until the tail bound certifies it.
inline SpectrumCutoff default_cutoff(const TrapGeometry& g, double temperature, double n_atoms,
                                     double tol = 1e-12) {
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  if (!(tol > 0.0)) throw ArgumentError("tail tolerance must be positive");
  const double beta = 1.0 / temperature;
  const double target = std::log(tol * n_atoms);
  double e = temperature * std::log(std::max(n_atoms, 1.0) / tol) + g.max_frequency();
  for (int i = 0; i < 200 && log_occupation_tail_bound(g, beta, e) > target; ++i) {
    e += 0.25 * temperature + g.min_frequency();
  }
  return {.max_energy = e, .tail_tolerance = tol};
}

}  // namespace bosegas
