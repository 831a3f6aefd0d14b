// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bosegas/bosegas.hpp"

using namespace bosegas;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel_gap(double a, double b) { return std::abs(a / b - 1.0); }

// 1. Recursion vs exhaustive multiset enumeration.
Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> energy(0.0, 4.0);
  double worst_z = 0.0, worst_p = 0.0, worst_n = 0.0;
  int cases = 0;
  for (int levels = 1; levels <= 12; ++levels) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> e{0.0};
      for (int i = 1; i < levels; ++i) e.push_back(trial % 4 == 0 && i > 1 ? e[i - 1] : energy(rng));
      for (int n = 1; n <= 4; ++n) {
        for (double beta : {0.1, 0.7, 2.0, 5.0}) {
          ++cases;
          const ExplicitSpectrum s{e};
          const ThermalState st(n, 1.0 / beta);
          const auto table = build_partition_table(s, st);
          const std::size_t m = e.size();
          long double z = 0.0L;
          std::vector<std::vector<long double>> p(m, std::vector<long double>(n + 1, 0.0L));
          std::vector<long double> mean(m, 0.0L);
          std::vector<int> occ(m, 0);
          std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            if (i + 1 == m) {
              occ[i] = left;
              long double en = 0.0L;
              for (std::size_t k = 0; k < m; ++k) en += static_cast<long double>(occ[k]) * e[k];
              const long double w = std::exp(-static_cast<long double>(st.beta()) * en);
              z += w;
              for (std::size_t k = 0; k < m; ++k) {
                p[k][occ[k]] += w;
                mean[k] += w * occ[k];
              }
              return;
            }
            for (int q = 0; q <= left; ++q) {
              occ[i] = q;
              rec(i + 1, left - q);
            }
          };
          rec(0, n);
          auto rel = [](double a, long double b) {
            return static_cast<double>(std::abs(static_cast<long double>(a) - b) / std::abs(b));
          };
          worst_z = std::max(worst_z, rel(std::exp(table.ln_z[n]), z));
          for (std::size_t k = 0; k < m; ++k) {
            const auto d = occupancy_distribution(s, st, e[k], table);
            for (int q = 0; q <= n; ++q) worst_p = std::max(worst_p, rel(d.probability[q], p[k][q] / z));
            worst_n = std::max(worst_n, rel(mean_occupation(s, st, e[k], table), mean[k] / z));
          }
        }
      }
    }
  }
  o.notes.push_back(std::to_string(cases) + " (spectrum, N, beta) cases, 1-12 levels, N = 1..4");
  o.check(worst_z <= 1e-12, "Z_N worst relative error " + fmt("%.2e", worst_z));
  o.check(worst_p <= 1e-12, "P(n|N) worst relative error " + fmt("%.2e", worst_p));
  o.check(worst_n <= 1e-12, "N_nu worst relative error " + fmt("%.2e", worst_n));
  return o;
}

// 2. Sum of all mode occupations.
Outcome normalization() {
  Outcome o;
  const long long n = 1000;
  for (int d = 1; d <= 3; ++d) {
    const auto g = TrapGeometry::isotropic(d);
    const double tc = characteristic_temperature(g, n);
    double lo = 1e300, hi = -1e300;
    for (int i = 1; i <= 20; ++i) {
      const ThermalState s(n, 1.2 * tc * i / 20.0);
      const auto spec = occupation_spectrum(g, s, 1e-8);
      double total = 0.0;
      for (const auto& l : spec.levels()) total += static_cast<double>(l.degeneracy) * l.occupation;
      lo = std::min(lo, total);
      hi = std::max(hi, total);
    }
    std::ostringstream what;
    what << d << "D: sum N_nu over 20 temperatures in [" << fmt("%.12f", lo) << ", " << fmt("%.12f", hi) << "]";
    o.check(lo >= n * (1.0 - 1e-6) && hi <= static_cast<double>(n), what.str());
  }
  return o;
}

// 3. Canonical vs grand-canonical sticking ratios at C = 0.2.
Outcome sticking_comparison() {
  Outcome o;
  const double c = 0.2;
  const std::vector<long long> ns{50, 100, 200, 400, 800, 1600};
  std::vector<double> gaps[4];
  for (int d = 1; d <= 3; ++d) {
    const auto g = TrapGeometry::isotropic(d);
    const auto can = parallel_map<double>(ns.size(), [&](std::size_t i) {
      const auto s = temperature_for_fraction(g, ns[i], c);
      const auto occ = leading_occupations(g, build_partition_table(g, s), 2);
      return occ[1] / occ[0];
    });
    std::string row = std::to_string(d) + "D gap |can/gc - 1|:";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double gc = sticking_ratio_gc(temperature_for_fraction_gc(g, static_cast<double>(ns[i]), c), g);
      gaps[d].push_back(rel_gap(can[i], gc));
      row += " " + std::to_string(ns[i]) + ":" + fmt("%.4f", gaps[d].back());
    }
    o.notes.push_back("info " + row);
  }

  const auto g1d = TrapGeometry::isotropic(1);
  double min_ratio = 1e300;
  std::vector<double> grand_ns{50, 100, 200, 400, 800, 1600};
  for (double n = 1e4; n <= 1e15 * 1.0001; n *= 10.0) grand_ns.push_back(n);
  for (double n : grand_ns) min_ratio = std::min(min_ratio, sticking_ratio_gc(temperature_for_fraction_gc(g1d, n, c), g1d));
  o.check(min_ratio > 0.1, "(a) 1D grand-canonical N1/N0 minimum over N <= 1e15: " + fmt("%.4f", min_ratio));

  for (int d = 2; d <= 3; ++d) {
    o.check(gaps[d].back() <= 0.05, "(b) " + std::to_string(d) + "D gap at N = 1600: " + fmt("%.4f", gaps[d].back()));
    bool decreasing = true;
    std::string where;
    for (std::size_t i = 1; i < gaps[d].size(); ++i) {
      if (!(gaps[d][i] < gaps[d][i - 1])) {
        decreasing = false;
        where += " N=" + std::to_string(ns[i - 1]) + "->" + std::to_string(ns[i]);
      }
    }
    o.check(decreasing, "(b) " + std::to_string(d) + "D gap decreasing in N" + (decreasing ? "" : "; rises at" + where));
  }
  o.check(gaps[1].back() > gaps[2].back(),
          "(c) 1D gap at 1600 (" + fmt("%.4f", gaps[1].back()) + ") exceeds 2D gap (" + fmt("%.4f", gaps[2].back()) + ")");
  return o;
}

// 4. Large-N scaling of the grand-canonical sticking ratio.
Outcome asymptotic_exponents() {
  Outcome o;
  std::vector<double> ns;
  for (double n = 1e8; n <= 1e12 * 1.0001; n *= std::sqrt(10.0)) ns.push_back(n);
  const auto f2 = asymptotic_scaling_exponent(2, ns);
  const auto f3 = asymptotic_scaling_exponent(3, ns);
  o.check(std::abs(f2.slope + 0.5) <= 0.05, "2D slope " + fmt("%.4f", f2.slope) + " (target -0.50 +- 0.05)");
  o.check(std::abs(f3.slope + 2.0 / 3.0) <= 0.05, "3D slope " + fmt("%.4f", f3.slope) + " (target -0.667 +- 0.05)");
  std::vector<double> ns1;
  for (double n = 1e10; n <= 1e15 * 1.0001; n *= 10.0) ns1.push_back(n);
  const auto f1 = asymptotic_scaling_exponent(1, ns1);
  o.check(f1.max_change_per_decade < 0.1,
          "1D (N1/N0) ln N: max change per decade " + fmt("%.4f", f1.max_change_per_decade) + ", mean " +
              fmt("%.4f", f1.mean_product));
  return o;
}

// 5. Spot values against the high-precision oracle.
Outcome spot_values() {
  Outcome o;
  const double oracle[] = {0.4279206875880264, 0.09686031347745443, 0.03938227604287087};
  for (int d = 1; d <= 3; ++d) {
    const auto g = TrapGeometry::isotropic(d);
    const double r = sticking_ratio_gc(temperature_for_fraction_gc(g, 1000, 0.2), g);
    o.check(rel_gap(r, oracle[d - 1]) <= 1e-6,
            std::to_string(d) + "D N1/N0 = " + fmt("%.16g", r) + " vs " + fmt("%.16g", oracle[d - 1]));
  }
  return o;
}

// 6. Quasicondensation point in 1D and 3D.
Outcome quasicondensation() {
  Outcome o;
  const std::vector<long long> ns{100, 200, 400, 800, 1600};
  std::vector<TphResult> r1, r3;
  for (int d : {1, 3}) {
    const auto g = TrapGeometry::isotropic(d);
    auto res = parallel_map<TphResult>(ns.size(), [&](std::size_t i) { return find_tph(g, ns[i]); });
    std::string row = "info " + std::to_string(d) + "D (N, Tph/Tc, N0ph/N):";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      row += " (" + std::to_string(ns[i]) + ", " + fmt("%.4f", res[i].temperature / res[i].characteristic_temperature) +
             ", " + fmt("%.4f", res[i].ground_fraction) + ")";
    }
    o.notes.push_back(row);
    (d == 1 ? r1 : r3) = std::move(res);
  }
  bool above_half = true, below_1d = true, hotter = true, dec3 = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    above_half = above_half && r1[i].ground_fraction > 0.5;
    below_1d = below_1d && r3[i].ground_fraction < r1[i].ground_fraction;
    hotter = hotter && r3[i].temperature / r3[i].characteristic_temperature >
                           r1[i].temperature / r1[i].characteristic_temperature;
    if (i > 0) dec3 = dec3 && r3[i].ground_fraction < r3[i - 1].ground_fraction;
  }
  const double drop1 = std::log(r1.back().ground_fraction / r1.front().ground_fraction);
  const double drop3 = std::log(r3.back().ground_fraction / r3.front().ground_fraction);
  o.check(above_half, "1D N0ph/N > 0.5 at every N");
  o.check(below_1d, "3D N0ph/N below 1D at every N");
  o.check(dec3 && drop3 < drop1, "3D N0ph/N decreasing, log-change over the range " + fmt("%.3f", drop3) +
                                     " vs 1D " + fmt("%.3f", drop1));
  o.check(hotter, "Tph/Tc(3D) > Tph/Tc(1D) at every N");
  return o;
}

// 7. Aspect-ratio sweep at N = 1000, C = 0.4.
Outcome aspect_sweep() {
  Outcome o;
  const long long n = 1000;
  const double c = 0.4;
  auto ratios_for = [&](const TrapGeometry& g) {
    const auto s = temperature_for_fraction(g, n, c);
    const auto occ = leading_occupations(g, build_partition_table(g, s), 3);
    return std::pair{occ[1] / occ[0], occ[2] / occ[0]};
  };
  const auto ratios = SweepSpec::range(1e-4, 1e4, 161, SweepScale::log).values();
  const auto pts = parallel_map<std::pair<double, double>>(
      ratios.size(), [&](std::size_t i) { return ratios_for(TrapGeometry::axially_symmetric(ratios[i])); });
  const auto [p1_1d, p2_1d] = ratios_for(TrapGeometry::isotropic(1));
  const auto [p1_2d, p2_2d] = ratios_for(TrapGeometry::isotropic(2));

  const auto& mid = pts[80];
  o.check(std::abs(mid.first - mid.second) <= 1e-10 * mid.first,
          "ratio 1: N1/N0 = " + fmt("%.12g", mid.first) + ", N2/N0 = " + fmt("%.12g", mid.second));
  const auto& lo = pts.front();
  const auto& hi = pts.back();
  o.check(rel_gap(lo.first, p1_1d) <= 0.02 && rel_gap(lo.second, p2_1d) <= 0.02,
          "ratio 1e-4 vs pure 1D: N1/N0 " + fmt("%.6f", lo.first) + " / " + fmt("%.6f", p1_1d) + ", N2/N0 " +
              fmt("%.6f", lo.second) + " / " + fmt("%.6f", p2_1d));
  o.check(rel_gap(hi.first, p1_2d) <= 0.02 && rel_gap(hi.second, p2_2d) <= 0.02,
          "ratio 1e4 vs pure 2D: N1/N0 " + fmt("%.6f", hi.first) + " / " + fmt("%.6f", p1_2d) + ", N2/N0 " +
              fmt("%.6f", hi.second) + " / " + fmt("%.6f", p2_2d));
  double worst = 0.0, at = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (double jump : {rel_gap(pts[i].first, pts[i - 1].first), rel_gap(pts[i].second, pts[i - 1].second)}) {
      if (jump > worst) {
        worst = jump;
        at = ratios[i];
      }
    }
  }
  o.check(worst <= 0.05, "largest adjacent relative change at 20 points/decade: " + fmt("%.4f", worst) +
                             " (near ratio " + fmt("%.3g", at) + ")");
  return o;
}

// 8. Coherence sanity.
Outcome coherence_sanity() {
  Outcome o;
  double worst_one = 0.0, worst_width = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const auto g = TrapGeometry::isotropic(d);
    const ThermalState s(1000, 0.01);
    const auto spec = occupation_spectrum(g, s, 1e-12);
    for (int a = 0; a < d; ++a) {
      const auto p = g1_profile(spec, default_grid(g, static_cast<Axis>(a), s.temperature()));
      for (double v : p.g1) worst_one = std::max(worst_one, std::abs(v - 1.0));
      worst_width = std::max(worst_width, std::abs(p.cloud_width - 2.0 * std::sqrt(std::log(2.0))));
    }
  }
  o.check(worst_one <= 1e-10, "N0 = N: max |g1 - 1| = " + fmt("%.2e", worst_one));
  o.check(worst_width <= 1e-4, "ground-state density FWHM error " + fmt("%.2e", worst_width));

  bool even = true;
  double max_abs = 0.0;
  int profiles = 0;
  for (int d = 1; d <= 3; ++d) {
    const auto g = TrapGeometry::isotropic(d);
    const double tc = characteristic_temperature(g, 1000);
    const auto res = parallel_map<std::pair<bool, double>>(12, [&](std::size_t i) {
      const ThermalState s(1000, 0.1 * static_cast<double>(i + 1) * tc);
      const auto p = g1_profile(occupation_spectrum(g, s, 1e-10), default_grid(g, Axis::x, s.temperature()));
      bool ev = true;
      double mx = 0.0;
      const int n = p.grid.count();
      for (int k = 0; k < n; ++k) {
        ev = ev && p.g1[k] == p.g1[n - 1 - k];
        mx = std::max(mx, std::abs(p.g1[k]));
      }
      return std::pair{ev, mx};
    });
    for (const auto& [ev, mx] : res) {
      even = even && ev;
      max_abs = std::max(max_abs, mx);
      ++profiles;
    }
  }
  o.check(even && max_abs <= 1.0, std::to_string(profiles) + " profiles over T/Tc in [0.1, 1.2]: even " +
                                      (even ? "yes" : "no") + ", max |g1| = " + fmt("%.17g", max_abs));
  return o;
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  ::pclose(p);
  return out;
}

// 9. Byte-identical CLI output across repeated and multi-threaded runs.
Outcome determinism() {
  Outcome o;
  const std::vector<std::string> commands{
      "occupations --dim 3 --natoms 1000 --t-over-tc 0.05:1.2:40",
      "sticking --dim 2 --natoms 50,100,200,400 --ensemble both",
      "aspect --aspect-ratio 0.01:100:17:log --natoms 300",
      "tph --dim 1 --natoms 100,200",
      "g1 --dim 2 --natoms 200 --t-over-tc 0.7 --grid-points 401",
  };
  for (const auto& args : commands) {
    const std::string bin = std::string(BOSEGAS_BINARY) + " " + args + " 2>&1";
    const auto a = capture("BOSE_THREADS=8 " + bin);
    const auto b = capture("BOSE_THREADS=8 " + bin);
    const auto c = capture("BOSE_THREADS=1 " + bin);
    o.check(!a.empty() && a == b && a == c, "'" + args + "': " + std::to_string(a.size()) + " bytes, identical across 3 runs");
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "oracle equivalence of the canonical core", oracle_equivalence},
      {2, "normalization of mode occupations", normalization},
      {3, "canonical vs grand-canonical sticking ratio", sticking_comparison},
      {4, "asymptotic scaling exponents", asymptotic_exponents},
      {5, "grand-canonical spot values", spot_values},
      {6, "quasicondensation point", quasicondensation},
      {7, "aspect-ratio sweep", aspect_sweep},
      {8, "coherence sanity", coherence_sanity},
      {9, "CLI determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s - %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
