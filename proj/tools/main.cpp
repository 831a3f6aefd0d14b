#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_trap_flags(CLI::App* cmd, bosegas::cli::Options& o, bool with_aspect = true) {
  cmd->add_option("--dim", o.dim, "Trap dimension (isotropic, omega = 1)")->check(CLI::Range(1, 3));
  cmd->add_option("--omega", o.omega, "Trap frequencies X[,Y[,Z]]")->delimiter(',');
  if (with_aspect) cmd->add_option("--aspect-ratio", o.aspect_ratio, "omega_z/omega_perp of a 3D trap with omega_perp = 1");
}

void add_output_flags(CLI::App* cmd, bosegas::cli::Options& o, std::string& out) {
  cmd->add_option("--cutoff-tol", o.cutoff_tol, "Fraction of atoms the spectral cutoff may drop")->capture_default_str();
  cmd->add_option("--out", out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  bosegas::cli::Options o;
  std::string out;
  CLI::App app{"Exact canonical and grand-canonical statistics of ideal Bose gases in harmonic traps."};
  app.set_version_flag("--version", bosegas::cli::version());
  app.require_subcommand(1);

  auto* occ = app.add_subcommand(
      "occupations",
      "Figure recipe: ground and first-excited mode populations N0/N, N1/N vs temperature");
  add_trap_flags(occ, o);
  occ->add_option("--natoms", o.natoms, "Atom number N")->required();
  occ->add_option("--temp", o.temp, "Temperature T, or a range A:B:K[:lin|log]");
  occ->add_option("--t-over-tc", o.t_over_tc, "T/T_c, or a range A:B:K[:lin|log]");
  occ->add_option("--n0-frac", o.n0_frac, "Solve for the temperature at this N0/N");
  occ->add_option("--ensemble", o.ensemble, "canonical (default) or grand");
  add_output_flags(occ, o, out);

  auto* stick = app.add_subcommand(
      "sticking",
      "Figure recipe: sticking ratio N1/N0 vs N at fixed N0/N, canonical against grand canonical");
  add_trap_flags(stick, o);
  stick->add_option("--natoms", o.natoms, "N values: a list or a range A:B:K[:lin|log]")->required();
  stick->add_option("--n0-frac", o.n0_frac, "Condensate fraction C (default 0.2)");
  stick->add_option("--ensemble", o.ensemble, "canonical, grand or both (default both)");
  stick->add_option("--gc-mode", o.gc_mode, "Grand-canonical temperature: closed (thermodynamic-limit formula) or exact")
      ->capture_default_str();
  stick->add_option("--canonical-cap", o.canonical_cap, "Largest N given a canonical row")->capture_default_str();
  add_output_flags(stick, o, out);

  auto* tph = app.add_subcommand(
      "tph",
      "Figure recipe: quasicondensation point T_ph/T_c and N0_ph/N vs N, where the coherence length "
      "meets the cloud width");
  add_trap_flags(tph, o);
  tph->add_option("--natoms", o.natoms, "N values: a list or a range A:B:K[:lin|log]")->required();
  tph->add_option("--axis", o.axis, "Cut axis x, y or z (default: softest axis)");
  tph->add_option("--grid-points", o.grid_points, "Odd number of grid points")->capture_default_str();
  tph->add_option("--ensemble", o.ensemble, "canonical only");
  add_output_flags(tph, o, out);

  auto* aspect = app.add_subcommand(
      "aspect",
      "Figure recipe: N1/N0 and N2/N0 vs aspect ratio omega_z/omega_perp at fixed N and N0/N");
  aspect->add_option("--aspect-ratio", o.aspect_ratio, "Ratios: a list or a range A:B:K[:lin|log]")->required();
  aspect->add_option("--natoms", o.natoms, "Atom number N (default 1000)");
  aspect->add_option("--n0-frac", o.n0_frac, "Condensate fraction C (default 0.4)");
  aspect->add_flag("--markers", o.markers, "Add k_B T_ph/(hbar omega_perp) and k_B T_ph/(hbar omega_z) columns");
  aspect->add_option("--grid-points", o.grid_points, "Odd grid size for the marker columns")->capture_default_str();
  add_output_flags(aspect, o, out);

  auto* g1 = app.add_subcommand("g1", "Profile: first-order correlation g1(-x,x) and density along one axis");
  add_trap_flags(g1, o);
  g1->add_option("--natoms", o.natoms, "Atom number N")->required();
  g1->add_option("--temp", o.temp, "Temperature T");
  g1->add_option("--t-over-tc", o.t_over_tc, "T/T_c");
  g1->add_option("--n0-frac", o.n0_frac, "Solve for the temperature at this N0/N");
  g1->add_option("--axis", o.axis, "Cut axis x, y or z (default: softest axis)");
  g1->add_option("--grid-extent", o.grid_extent, "Half-width L of the grid [-L, L]");
  g1->add_option("--grid-points", o.grid_points, "Odd number of grid points")->capture_default_str();
  add_output_flags(g1, o, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  o.command = app.get_subcommands().front()->get_name();

  bosegas::cli::CommandResult result;
  try {
    result = bosegas::cli::run_command(o);
  } catch (const bosegas::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  if (out.empty() || out == "-") {
    std::cout << result.csv << std::flush;
  } else {
    std::ofstream file(out, std::ios::binary);
    file << result.csv;
    if (!file) {
      std::cerr << "error: cannot write " << out << '\n';
      return 3;
    }
  }
  return result.exit_code;
}
