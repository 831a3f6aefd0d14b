#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bosegas/bosegas.hpp"

#ifndef BOSEGAS_VERSION
#define BOSEGAS_VERSION "unknown"
#endif

namespace bosegas::cli {

std::string version() { return BOSEGAS_VERSION; }

namespace {

struct Csv {
  std::ostringstream out;

  void meta(const std::string& key, const std::string& value) { out << "# " << key << ": " << value << '\n'; }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
};

std::string fmt_int(long long v) { return std::to_string(v); }

TrapGeometry geometry_from(const Options& opt, bool allow_aspect = true) {
  if (opt.aspect_ratio && allow_aspect) {
    if (!opt.omega.empty()) throw UsageError("--aspect-ratio and --omega are mutually exclusive");
    if (opt.dim && *opt.dim != 3) throw UsageError("--aspect-ratio implies a 3D trap");
    const auto v = SweepSpec::parse(*opt.aspect_ratio).values();
    if (v.size() != 1) throw UsageError("this command takes a single --aspect-ratio value");
    if (!(v[0] > 0.0)) throw UsageError("--aspect-ratio must be positive");
    return TrapGeometry::axially_symmetric(v[0]);
  }
  if (!opt.omega.empty()) {
    if (opt.dim && *opt.dim != static_cast<int>(opt.omega.size())) {
      throw UsageError("--dim disagrees with the number of --omega values");
    }
    try {
      return TrapGeometry::with_frequencies(opt.omega);
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
  }
  if (!opt.dim) throw UsageError("a trap needs --dim, --omega or --aspect-ratio");
  if (*opt.dim < 1 || *opt.dim > 3) throw UsageError("--dim must be 1, 2 or 3");
  return TrapGeometry::isotropic(*opt.dim);
}

std::string describe_geometry(const TrapGeometry& g) {
  std::string s = "dim=" + std::to_string(g.dimension()) + " omega=";
  for (int i = 0; i < g.dimension(); ++i) s += (i ? "," : "") + format_real(g.omega(i));
  return s;
}

std::vector<long long> atom_counts(const Options& opt, long long fallback = 0) {
  if (!opt.natoms) {
    if (fallback > 0) return {fallback};
    throw UsageError("--natoms is required");
  }
  std::vector<long long> out;
  for (double v : SweepSpec::parse(*opt.natoms).values()) {
    if (!(v >= 1.0) || v > 9e18) throw UsageError("--natoms values must be at least 1");
    out.push_back(std::llround(v));
  }
  return out;
}

long long single_atom_count(const Options& opt, long long fallback = 0) {
  const auto n = atom_counts(opt, fallback);
  if (n.size() != 1) throw UsageError("this command takes a single --natoms value");
  return n.front();
}

double fraction_or(const Options& opt, double fallback) {
  const double c = opt.n0_frac.value_or(fallback);
  if (!(c > 0.0 && c < 1.0)) throw UsageError("--n0-frac must lie in (0, 1)");
  return c;
}

enum class TempSource { absolute, relative, fraction };

struct Temperatures {
  TempSource source;
  std::vector<double> values;  // absolute temperatures
  std::string description;
};

Temperatures temperatures_from(const Options& opt, const TrapGeometry& g, long long n) {
  const int given = (opt.temp ? 1 : 0) + (opt.t_over_tc ? 1 : 0) + (opt.n0_frac ? 1 : 0);
  if (given != 1) throw UsageError("give exactly one of --temp, --t-over-tc, --n0-frac");
  if (opt.temp) {
    const auto spec = SweepSpec::parse(*opt.temp);
    return {TempSource::absolute, spec.values(), "temp " + spec.describe()};
  }
  if (opt.t_over_tc) {
    const auto spec = SweepSpec::parse(*opt.t_over_tc);
    const double tc = characteristic_temperature(g, n);
    std::vector<double> v;
    for (double a : spec.values()) v.push_back(a * tc);
    return {TempSource::relative, v, "t-over-tc " + spec.describe()};
  }
  const double c = fraction_or(opt, 0.5);
  return {TempSource::fraction, {temperature_for_fraction(g, n, c).temperature()},
          "n0-frac " + format_real(c)};
}

void check_positive(const std::vector<double>& temps) {
  for (double t : temps) {
    if (!(t > 0.0)) throw UsageError("temperatures must be positive");
  }
}

void common_meta(Csv& csv, const Options& opt, const std::string& figure) {
  csv.meta("bosegas", version());
  csv.meta("command", opt.command);
  csv.meta("reproduces", figure);
  csv.meta("units", "oscillator units of the reference frequency (energy hbar*w0, temperature hbar*w0/kB)");
}

Axis axis_from(const Options& opt, const TrapGeometry& g) {
  if (!opt.axis) return g.softest_axis();
  Axis a;
  if (*opt.axis == "x") a = Axis::x;
  else if (*opt.axis == "y") a = Axis::y;
  else if (*opt.axis == "z") a = Axis::z;
  else throw UsageError("--axis must be x, y or z");
  if (axis_index(a) >= g.dimension()) throw UsageError("--axis " + *opt.axis + " is absent in this trap");
  return a;
}

CommandResult cmd_occupations(const Options& opt) {
  const auto g = geometry_from(opt);
  const long long n = single_atom_count(opt);
  if (n < 2) throw UsageError("--natoms must be at least 2");
  const std::string ensemble = opt.ensemble.empty() ? "canonical" : opt.ensemble;
  if (ensemble != "canonical" && ensemble != "grand") {
    throw UsageError("occupations supports --ensemble canonical or grand");
  }
  const auto temps = temperatures_from(opt, g, n);
  for (double t : temps.values) {
    if (!(t >= 0.0)) throw UsageError("temperatures must not be negative");
  }
  const double tc = characteristic_temperature(g, n);
  const double e1 = ranked_mode(g, 1).energy;

  struct Row {
    double t, f0, f1, ratio;
  };
  const auto rows = parallel_map<Row>(temps.values.size(), [&](std::size_t i) {
    const double t = temps.values[i];
    if (t == 0.0) return Row{0.0, 1.0, 0.0, 0.0};
    double n0 = 0.0, n1 = 0.0;
    if (ensemble == "canonical") {
      const auto table = build_partition_table(g, ThermalState(n, t));
      n0 = mean_occupation(table, 0.0);
      n1 = mean_occupation(table, e1);
    } else {
      const auto st = solve_fugacity(g, static_cast<double>(n), t, opt.cutoff_tol);
      n0 = st.fugacity.condensate();
      n1 = bose_occupation(st.fugacity, e1 / t);
    }
    return Row{t, n0 / n, n1 / n, n1 / n0};
  });

  Csv csv;
  common_meta(csv, opt, "populations of the ground and first excited modes vs temperature (N_0/N, N_1/N)");
  csv.meta("geometry", describe_geometry(g));
  csv.meta("natoms", fmt_int(n));
  csv.meta("ensemble", ensemble);
  csv.meta("temperature", temps.description);
  csv.meta("tc", format_real(tc));
  csv.meta("cutoff_tol", format_real(opt.cutoff_tol));
  csv.line({"T", "N0/N", "N1/N", "N1/N0"});
  for (const auto& r : rows) csv.line({format_real(r.t), format_real(r.f0), format_real(r.f1), format_real(r.ratio)});
  return {csv.out.str(), 0};
}

CommandResult cmd_sticking(const Options& opt) {
  const auto g = geometry_from(opt);
  const auto counts = atom_counts(opt);
  const double c = fraction_or(opt, 0.2);
  const std::string ensemble = opt.ensemble.empty() ? "both" : opt.ensemble;
  if (ensemble != "canonical" && ensemble != "grand" && ensemble != "both") {
    throw UsageError("--ensemble must be canonical, grand or both");
  }
  GcMode mode;
  if (opt.gc_mode == "closed") mode = GcMode::closed_form;
  else if (opt.gc_mode == "exact") mode = GcMode::exact;
  else throw UsageError("--gc-mode must be closed or exact");
  for (long long n : counts) {
    if (ensemble == "canonical" && n > opt.canonical_cap) {
      throw UsageError("canonical ensemble refused for N = " + fmt_int(n) + ": above the canonical cap of " +
                       fmt_int(opt.canonical_cap) + " atoms (--canonical-cap)");
    }
    if (n < 2 && ensemble != "grand") throw UsageError("canonical rows need --natoms >= 2");
  }

  struct Task {
    long long n;
    bool canonical;
  };
  std::vector<Task> tasks;
  for (long long n : counts) {
    if (ensemble != "grand" && n <= opt.canonical_cap) tasks.push_back({n, true});
    if (ensemble != "canonical") tasks.push_back({n, false});
  }
  const auto ratios = parallel_map<double>(tasks.size(), [&](std::size_t i) {
    const auto& task = tasks[i];
    if (task.canonical) {
      const auto s = temperature_for_fraction(g, task.n, c);
      const auto occ = leading_occupations(g, build_partition_table(g, s), 2);
      return occ[1] / occ[0];
    }
    return sticking_ratio_gc(temperature_for_fraction_gc(g, static_cast<double>(task.n), c, mode, opt.cutoff_tol), g);
  });

  Csv csv;
  common_meta(csv, opt, "sticking ratio N_1/N_0 vs atom number at fixed N_0/N, canonical and grand canonical");
  csv.meta("geometry", describe_geometry(g));
  csv.meta("natoms", SweepSpec::parse(*opt.natoms).describe());
  csv.meta("n0_frac", format_real(c));
  csv.meta("ensemble", ensemble);
  csv.meta("gc_mode", to_string(mode));
  csv.meta("canonical_cap", fmt_int(opt.canonical_cap));
  csv.meta("cutoff_tol", format_real(opt.cutoff_tol));
  csv.line({"N", "ensemble", "N1/N0"});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    csv.line({fmt_int(tasks[i].n), tasks[i].canonical ? "canonical" : "grand", format_real(ratios[i])});
  }
  return {csv.out.str(), 0};
}

CommandResult cmd_tph(const Options& opt) {
  const auto g = geometry_from(opt);
  const auto counts = atom_counts(opt);
  if (!opt.ensemble.empty() && opt.ensemble != "canonical") throw UsageError("tph supports the canonical ensemble only");
  for (long long n : counts) {
    if (n < 2) throw UsageError("--natoms values must be at least 2");
  }
  TphOptions topt;
  topt.grid_points = opt.grid_points;
  topt.axis = axis_from(opt, g);
  topt.cutoff_tolerance = std::max(opt.cutoff_tol, 1e-12);

  struct Row {
    long long n;
    double tph_over_tc, f0;
    std::string status;
  };
  const auto rows = parallel_map<Row>(counts.size(), [&](std::size_t i) {
    const long long n = counts[i];
    try {
      const auto r = find_tph(g, n, topt);
      return Row{n, r.temperature / r.characteristic_temperature, r.ground_fraction,
                 r.multiple_roots ? "ok;multiple-roots" : "ok"};
    } catch (const Error& e) {
      std::string msg = e.what();
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      return Row{n, std::nan(""), std::nan(""), "error: " + msg};
    }
  });

  Csv csv;
  common_meta(csv, opt, "quasicondensation point T_ph (coherence length = cloud width) and N0_ph/N vs N");
  csv.meta("geometry", describe_geometry(g));
  csv.meta("natoms", SweepSpec::parse(*opt.natoms).describe());
  csv.meta("ensemble", "canonical");
  csv.meta("axis", axis_name(*topt.axis));
  csv.meta("grid_points", std::to_string(opt.grid_points));
  csv.meta("cutoff_tol", format_real(topt.cutoff_tolerance));
  csv.line({"N", "Tph/Tc", "N0ph/N", "status"});
  int code = 0;
  for (const auto& r : rows) {
    if (r.status.rfind("ok", 0) != 0) code = 3;
    csv.line({fmt_int(r.n), format_real(r.tph_over_tc), format_real(r.f0), r.status});
  }
  return {csv.out.str(), code};
}

CommandResult cmd_aspect(const Options& opt) {
  if (!opt.aspect_ratio) throw UsageError("aspect needs --aspect-ratio start:stop:steps[:log]");
  if (!opt.omega.empty() || (opt.dim && *opt.dim != 3)) throw UsageError("aspect builds its own 3D trap");
  const auto ratios = SweepSpec::parse(*opt.aspect_ratio).values();
  for (double r : ratios) {
    if (!(r > 0.0)) throw UsageError("aspect ratios must be positive");
  }
  const long long n = single_atom_count(opt, 1000);
  if (n < 3) throw UsageError("--natoms must be at least 3");
  const double c = fraction_or(opt, 0.4);

  struct Row {
    double ratio, f0, r1, r2, tph_perp, tph_z;
  };
  const auto rows = parallel_map<Row>(ratios.size(), [&](std::size_t i) {
    const auto g = TrapGeometry::axially_symmetric(ratios[i]);
    const auto s = temperature_for_fraction(g, n, c);
    const auto table = build_partition_table(g, s);
    const auto occ = leading_occupations(g, table, 3);
    Row row{ratios[i], occ[0] / n, occ[1] / occ[0], occ[2] / occ[0], std::nan(""), std::nan("")};
    if (opt.markers) {
      TphOptions topt;
      topt.grid_points = opt.grid_points;
      topt.cutoff_tolerance = std::max(opt.cutoff_tol, 1e-12);
      try {
        const double tph = find_tph(g, n, topt).temperature;
        row.tph_perp = tph / g.omega(Axis::x);
        row.tph_z = tph / g.omega(Axis::z);
      } catch (const RangeError&) {
      }
    }
    return row;
  });

  Csv csv;
  common_meta(csv, opt, "N_1/N_0 and N_2/N_0 vs aspect ratio omega_z/omega_perp at fixed N and N_0/N");
  csv.meta("geometry", "omega=(1,1,ratio)");
  csv.meta("aspect_ratio", SweepSpec::parse(*opt.aspect_ratio).describe());
  csv.meta("natoms", fmt_int(n));
  csv.meta("n0_frac", format_real(c));
  csv.meta("ensemble", "canonical");
  if (opt.markers) {
    csv.meta("markers", "kB*Tph/(hbar*omega_perp) and kB*Tph/(hbar*omega_z); the value 1 marks each condition");
    csv.line({"omega_z/omega_perp", "N0/N", "N1/N0", "N2/N0", "Tph/omega_perp", "Tph/omega_z"});
  } else {
    csv.line({"omega_z/omega_perp", "N0/N", "N1/N0", "N2/N0"});
  }
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_real(r.ratio), format_real(r.f0), format_real(r.r1), format_real(r.r2)};
    if (opt.markers) {
      cells.push_back(format_real(r.tph_perp));
      cells.push_back(format_real(r.tph_z));
    }
    csv.line(cells);
  }
  return {csv.out.str(), 0};
}

CommandResult cmd_g1(const Options& opt) {
  const auto g = geometry_from(opt);
  const long long n = single_atom_count(opt);
  if (n < 2) throw UsageError("--natoms must be at least 2");
  const auto temps = temperatures_from(opt, g, n);
  if (temps.values.size() != 1) throw UsageError("g1 takes a single temperature");
  check_positive(temps.values);
  const double t = temps.values.front();
  const Axis axis = axis_from(opt, g);
  if (opt.grid_points < 3 || opt.grid_points % 2 == 0) throw UsageError("--grid-points must be odd and >= 3");
  const auto grid = opt.grid_extent ? AxisGrid(axis, *opt.grid_extent, opt.grid_points)
                                    : default_grid(g, axis, t, opt.grid_points);
  const ThermalState s(n, t);
  const double tol = std::max(opt.cutoff_tol, 1e-12);
  const auto spec = occupation_spectrum(g, s, default_cutoff(g, t, static_cast<double>(n), tol));
  ProfileOptions popt;
  popt.widen_for_coherence = false;
  const auto p = g1_profile(spec, grid, popt);

  Csv csv;
  common_meta(csv, opt, "first-order correlation g1(-x,x) and density along a principal axis");
  csv.meta("geometry", describe_geometry(g));
  csv.meta("natoms", fmt_int(n));
  csv.meta("temperature", format_real(t));
  csv.meta("t_over_tc", format_real(t / characteristic_temperature(g, n)));
  csv.meta("temperature_source", temps.description);
  csv.meta("axis", axis_name(axis));
  csv.meta("grid", "extent=" + format_real(p.grid.extent()) + " points=" + std::to_string(p.grid.count()));
  csv.meta("cutoff", "max_energy=" + format_real(spec.cutoff().max_energy) + " tol=" + format_real(tol));
  csv.meta("captured_fraction", format_real(spec.captured_fraction()));
  csv.line({"x", "g1", "density"});
  for (int i = 0; i < p.grid.count(); ++i) {
    csv.line({format_real(p.grid.point(i)), format_real(p.g1[i]), format_real(p.density[i])});
  }
  csv.meta("coherence_length", format_real(p.coherence_length));
  csv.meta("cloud_width", format_real(p.cloud_width));
  return {csv.out.str(), 0};
}

}  // namespace

CommandResult run_command(const Options& opt) {
  if (opt.format != "csv") throw UsageError("only --format csv is supported");
  if (opt.command == "occupations") return cmd_occupations(opt);
  if (opt.command == "sticking") return cmd_sticking(opt);
  if (opt.command == "tph") return cmd_tph(opt);
  if (opt.command == "aspect") return cmd_aspect(opt);
  if (opt.command == "g1") return cmd_g1(opt);
  throw UsageError("unknown command '" + opt.command + "'");
}

}  // namespace bosegas::cli
