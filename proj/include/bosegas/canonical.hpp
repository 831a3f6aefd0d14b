#pragma once

// Exact fixed-N statistics of an ideal Bose gas.
//
// Z_0 = 1 and Z_N(beta) = (1/N) sum_{n=1}^N Z_1(n beta) Z_{N-n}(beta). Every
// term is positive, so the recursion runs in the log domain with log-sum-exp
// and never overflows. From the table:
//   P>=(n|N) = e^{-n beta eps} Z_{N-n} / Z_N       (at least n atoms in the mode)
//   P(n|N)   = P>=(n|N) - P>=(n+1|N)
//   N_eps    = sum_{n>=1} P>=(n|N)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bosegas/errors.hpp"
#include "bosegas/numeric.hpp"
#include "bosegas/trap_spectrum.hpp"

namespace bosegas {

class ThermalState {
public:
  ThermalState(long long n_atoms, double temperature) : n_atoms_(n_atoms), temperature_(temperature) {
    if (n_atoms < 1) throw ArgumentError("a thermal state needs at least one atom");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      throw ArgumentError("temperature must be finite and positive");
    }
  }
  long long n_atoms() const { return n_atoms_; }
  double temperature() const { return temperature_; }
  double beta() const { return 1.0 / temperature_; }

private:
  long long n_atoms_;
  double temperature_;
};

/// ln Z_k(beta) for k = 0..N.
struct PartitionTable {
  std::vector<double> ln_z;
  std::vector<double> ln_z1;  // ln Z_1(k beta), k = 0..N (entry 0 unused)
  double beta = 0.0;
  std::size_t spectrum_fingerprint = 0;

  long long n_atoms() const { return static_cast<long long>(ln_z.size()) - 1; }
};

template <SingleParticleSpectrum S>
PartitionTable build_partition_table(const S& spectrum, const ThermalState& s) {
  const long long n = s.n_atoms();
  const double beta = s.beta();
  std::vector<double> ln_z1(static_cast<std::size_t>(n) + 1, 0.0);
  for (long long k = 1; k <= n; ++k) ln_z1[k] = single_particle_log_z(spectrum, beta * static_cast<double>(k));

  PartitionTable t;
  t.beta = beta;
  t.spectrum_fingerprint = fingerprint(spectrum);
  t.ln_z1 = ln_z1;
  t.ln_z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (long long k = 1; k <= n; ++k) {
    terms.clear();
    for (long long m = 1; m <= k; ++m) terms.push_back(ln_z1[m] + t.ln_z[k - m]);
    const double v = numeric::log_sum_exp(terms) - std::log(static_cast<double>(k));
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite ln Z_" + std::to_string(k) + " in the partition recursion");
    }
    t.ln_z[k] = v;
  }
  return t;
}

namespace detail {

inline void check_table(const PartitionTable& t, std::size_t fp, const ThermalState& s) {
  if (t.spectrum_fingerprint != fp || t.beta != s.beta() || t.n_atoms() != s.n_atoms()) {
    throw ArgumentError("partition table was built for a different spectrum or thermal state");
  }
}

inline void check_energy(double energy) {
  if (!(energy >= 0.0)) throw ArgumentError("mode energy must be non-negative");
}

}  // namespace detail

/// ln P>=(n|N) for n = 0..N+1 (the last entry is -inf).
inline std::vector<double> log_at_least(const PartitionTable& t, double energy) {
  detail::check_energy(energy);
  const long long n_atoms = t.n_atoms();
  std::vector<double> out(static_cast<std::size_t>(n_atoms) + 2, -std::numeric_limits<double>::infinity());
  const double ln_zn = t.ln_z[n_atoms];
  for (long long n = 0; n <= n_atoms; ++n) {
    out[n] = -static_cast<double>(n) * t.beta * energy + t.ln_z[n_atoms - n] - ln_zn;
  }
  return out;
}

struct OccupancyDistribution {
  std::vector<double> probability;  // P(n|N), n = 0..N
};

/// P(n|N) for a mode of the given energy.
///
/// P(n) = P>=(n) - P>=(n+1) = e^{-n beta eps} (Z_{N-n} - e^{-beta eps} Z_{N-n-1}) / Z_N, and the
/// bracket is the (N-n)-atom partition function of the spectrum with this one
/// mode removed. That function obeys the same recursion with
/// Z_1'(k beta) = Z_1(k beta) - e^{-k beta eps}, so every term is positive and
/// probabilities far below 1 keep full relative precision.
inline OccupancyDistribution occupancy_distribution(const PartitionTable& t, double energy) {
  detail::check_energy(energy);
  const long long n_atoms = t.n_atoms();
  const double inf = std::numeric_limits<double>::infinity();
  const double x = t.beta * energy;

  std::vector<double> ln_z1_rest(static_cast<std::size_t>(n_atoms) + 1, -inf);
  for (long long k = 1; k <= n_atoms; ++k) {
    const double kx = static_cast<double>(k) * x;
    const double excess = t.ln_z1[k] + kx;  // ln(Z_1 e^{k beta eps}) >= 0
    if (excess > 0.0) ln_z1_rest[k] = t.ln_z1[k] + numeric::log1mexp(excess);
  }
  std::vector<double> ln_rest(static_cast<std::size_t>(n_atoms) + 1, -inf);
  ln_rest[0] = 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n_atoms));
  for (long long m = 1; m <= n_atoms; ++m) {
    terms.clear();
    for (long long k = 1; k <= m; ++k) terms.push_back(ln_z1_rest[k] + ln_rest[m - k]);
    ln_rest[m] = numeric::log_sum_exp(terms) - std::log(static_cast<double>(m));
  }

  OccupancyDistribution d;
  d.probability.resize(static_cast<std::size_t>(n_atoms) + 1);
  const double ln_zn = t.ln_z[n_atoms];
  double total = 0.0;
  for (long long n = 0; n <= n_atoms; ++n) {
    const double p = std::exp(-static_cast<double>(n) * x + ln_rest[n_atoms - n] - ln_zn);
    if (!std::isfinite(p)) throw NumericalError("non-finite occupancy probability");
    d.probability[n] = p;
    total += p;
  }
  if (!(total > 0.0)) throw NumericalError("occupancy distribution does not normalize");
  for (double& p : d.probability) p /= total;
  return d;
}

template <SingleParticleSpectrum S>
OccupancyDistribution occupancy_distribution(const S& spectrum, const ThermalState& s, double energy,
                                             const PartitionTable& t) {
  detail::check_table(t, fingerprint(spectrum), s);
  return occupancy_distribution(t, energy);
}

inline OccupancyDistribution occupancy_distribution(const TrapGeometry& g, const ThermalState& s,
                                                    const ModeIndex& nu, const PartitionTable& t) {
  return occupancy_distribution(g, s, mode_energy(g, nu), t);
}

/// N_eps = sum_{n>=1} P>=(n|N). Terms are non-increasing and the remainder
/// after term n is below term_n / (e^{beta eps} - 1), which stops the sum early
/// for high-lying modes.
inline double mean_occupation(const PartitionTable& t, double energy) {
  detail::check_energy(energy);
  const long long n_atoms = t.n_atoms();
  const double ln_zn = t.ln_z[n_atoms];
  const double x = t.beta * energy;
  const double tail_factor = x > 0.0 ? 1.0 / std::expm1(x) : std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (long long n = 1; n <= n_atoms; ++n) {
    const double term = std::exp(-static_cast<double>(n) * x + t.ln_z[n_atoms - n] - ln_zn);
    sum += term;
    if (term * tail_factor < 1e-17 * sum) break;
  }
  return sum;
}

template <SingleParticleSpectrum S>
double mean_occupation(const S& spectrum, const ThermalState& s, double energy, const PartitionTable& t) {
  detail::check_table(t, fingerprint(spectrum), s);
  return mean_occupation(t, energy);
}

inline double mean_occupation(const TrapGeometry& g, const ThermalState& s, const ModeIndex& nu,
                              const PartitionTable& t) {
  return mean_occupation(g, s, mode_energy(g, nu), t);
}

/// Eigenvalues of the one-body density matrix, stored per distinct energy.
/// Modes of equal energy share one occupation, so per-mode queries go through
/// the level list.
struct OccupationLevel {
  double energy;
  std::uint64_t degeneracy;
  double occupation;  // per mode
};

class OccupationSpectrum {
public:
  OccupationSpectrum(TrapGeometry g, long long n_atoms, SpectrumCutoff cutoff, std::vector<OccupationLevel> levels)
      : geometry_(g), n_atoms_(n_atoms), cutoff_(cutoff), levels_(std::move(levels)) {
    if (levels_.empty() || levels_.front().energy != 0.0) {
      throw ArgumentError("an occupation spectrum must start with the ground level");
    }
    double captured = 0.0;
    for (const auto& l : levels_) captured += static_cast<double>(l.degeneracy) * l.occupation;
    captured_fraction_ = captured / static_cast<double>(n_atoms_);
  }

  const TrapGeometry& geometry() const { return geometry_; }
  long long n_atoms() const { return n_atoms_; }
  const SpectrumCutoff& cutoff() const { return cutoff_; }
  const std::vector<OccupationLevel>& levels() const { return levels_; }
  double captured_fraction() const { return captured_fraction_; }

  double ground_occupation() const { return levels_.front().occupation; }

  std::uint64_t mode_count() const {
    std::uint64_t c = 0;
    for (const auto& l : levels_) c += l.degeneracy;
    return c;
  }

  /// Occupation of the level at the given energy; tolerant to last-bit
  /// differences in how the energy was summed.
  double occupation_at_energy(double energy) const {
    const auto it = std::lower_bound(levels_.begin(), levels_.end(), energy,
                                     [](const OccupationLevel& l, double e) { return l.energy < e; });
    const double tol = 1e-9 * std::max(1.0, std::abs(energy));
    const OccupationLevel* best = nullptr;
    if (it != levels_.end() && std::abs(it->energy - energy) <= tol) best = &*it;
    if (it != levels_.begin() && std::abs(std::prev(it)->energy - energy) <= tol) {
      if (!best || std::abs(std::prev(it)->energy - energy) < std::abs(best->energy - energy)) best = &*std::prev(it);
    }
    if (!best) {
      throw ArgumentError("energy " + std::to_string(energy) + " is not a level of this spectrum (cutoff " +
                          std::to_string(cutoff_.max_energy) + ")");
    }
    return best->occupation;
  }

  double occupation(const ModeIndex& m) const { return occupation_at_energy(mode_energy(geometry_, m)); }

  /// Occupation of the k-th mode in the energy-sorted mode list.
  double occupation_at_rank(std::uint64_t k) const {
    std::uint64_t seen = 0;
    for (const auto& l : levels_) {
      seen += l.degeneracy;
      if (k < seen) return l.occupation;
    }
    throw ArgumentError("spectrum holds only " + std::to_string(seen) + " modes, rank " + std::to_string(k) +
                        " requested");
  }

  /// f(const ModeIndex&, double energy, double occupation) for every mode under the cutoff.
  template <class F>
  void for_each_mode(F&& f) const {
    bosegas::for_each_mode(geometry_, levels_.back().energy,
                           [&](const ModeIndex& m, double e) { f(m, e, occupation_at_energy(e)); });
  }

private:
  TrapGeometry geometry_;
  long long n_atoms_;
  SpectrumCutoff cutoff_;
  std::vector<OccupationLevel> levels_;
  double captured_fraction_ = 0.0;
};

inline OccupationSpectrum occupation_spectrum(const TrapGeometry& g, const ThermalState& s,
                                              const SpectrumCutoff& cutoff, const PartitionTable& t) {
  detail::check_table(t, fingerprint(g), s);
  const auto levels = energy_levels(g, cutoff.max_energy, cutoff.max_entries);
  std::vector<OccupationLevel> occ;
  occ.reserve(levels.size());
  for (const auto& l : levels) occ.push_back({l.energy, l.degeneracy, mean_occupation(t, l.energy)});
  OccupationSpectrum spec(g, s.n_atoms(), cutoff, std::move(occ));
  // The rounding allowance covers summation error over many levels.
  if (spec.captured_fraction() < 1.0 - cutoff.tail_tolerance - 1e-12) {
    throw CutoffError("spectral cutoff " + std::to_string(cutoff.max_energy) + " captures only a fraction " +
                          std::to_string(spec.captured_fraction()) + " of the atoms",
                      spec.captured_fraction());
  }
  return spec;
}

inline OccupationSpectrum occupation_spectrum(const TrapGeometry& g, const ThermalState& s,
                                              const SpectrumCutoff& cutoff) {
  return occupation_spectrum(g, s, cutoff, build_partition_table(g, s));
}

inline OccupationSpectrum occupation_spectrum(const TrapGeometry& g, const ThermalState& s, double tol = 1e-12) {
  return occupation_spectrum(g, s, default_cutoff(g, s.temperature(), static_cast<double>(s.n_atoms()), tol));
}

/// N_k / N_0 with N_k the occupation of the k-th mode in energy order (ties
/// lexicographic), counted with multiplicity.
inline double sticking_ratio(const OccupationSpectrum& spec, int k) {
  if (k < 1 || k > 2) throw ArgumentError("sticking ratio index must be 1 or 2");
  if (spec.mode_count() < static_cast<std::uint64_t>(k) + 1) {
    throw ArgumentError("spectrum has too few modes for sticking ratio N_" + std::to_string(k) + "/N_0");
  }
  return spec.occupation_at_rank(static_cast<std::uint64_t>(k)) / spec.ground_occupation();
}

/// N_0 / N from a prebuilt table.
inline double ground_fraction(const PartitionTable& t) {
  return mean_occupation(t, 0.0) / static_cast<double>(t.n_atoms());
}

/// Occupations of the first `count` modes in energy order, without building
/// a full spectrum.
inline std::vector<double> leading_occupations(const TrapGeometry& g, const PartitionTable& t, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(mean_occupation(t, ranked_mode(g, k).energy));
  return out;
}

/// Temperature at which N_0/N equals target_fraction. Bisection in ln T; N_0
/// decreases monotonically with T. The bracket starts at
/// [1e-3 min(omega), 10 T_c] and is widened outward if needed.
inline ThermalState temperature_for_fraction(const TrapGeometry& g, long long n_atoms, double target_fraction) {
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw ArgumentError("target condensate fraction must lie in (0, 1)");
  }
  if (n_atoms < 2) throw ArgumentError("temperature_for_fraction needs at least 2 atoms");
  auto fraction_at = [&](double temp) {
    const ThermalState s(n_atoms, temp);
    return ground_fraction(build_partition_table(g, s));
  };
  double lo = 1e-3 * g.min_frequency();
  double hi = 10.0 * characteristic_temperature(g, n_atoms);
  double f_lo = fraction_at(lo);
  double f_hi = fraction_at(hi);
  for (int i = 0; i < 8 && f_lo < target_fraction; ++i) f_lo = fraction_at(lo *= 0.1);
  for (int i = 0; i < 8 && f_hi > target_fraction; ++i) f_hi = fraction_at(hi *= 10.0);
  if (f_lo < target_fraction || f_hi > target_fraction) {
    throw RangeError("no temperature bracket for N0/N = " + std::to_string(target_fraction) + ": N0/N(" +
                     std::to_string(lo) + ") = " + std::to_string(f_lo) + ", N0/N(" + std::to_string(hi) +
                     ") = " + std::to_string(f_hi));
  }
  double log_lo = std::log(lo), log_hi = std::log(hi);
  double mid_fraction = f_lo;
  double mid = lo;
  for (int it = 0; it < 200 && log_hi - log_lo > 1e-15; ++it) {
    const double log_mid = 0.5 * (log_lo + log_hi);
    mid = std::exp(log_mid);
    mid_fraction = fraction_at(mid);
    if (std::abs(mid_fraction - target_fraction) <= 1e-12 * target_fraction) break;
    (mid_fraction > target_fraction ? log_lo : log_hi) = log_mid;
  }
  if (std::abs(mid_fraction - target_fraction) > 1e-8 * target_fraction) {
    throw NumericalError("temperature bisection stalled at N0/N = " + std::to_string(mid_fraction));
  }
  return ThermalState(n_atoms, mid);
}

}  // namespace bosegas
