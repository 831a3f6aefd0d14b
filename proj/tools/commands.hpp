#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bosegas/errors.hpp"

namespace bosegas::cli {

/// Bad flag combination or value; exit code 2.
class UsageError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

struct Options {
  std::string command;
  std::optional<int> dim;
  std::vector<double> omega;
  std::optional<std::string> aspect_ratio;
  std::optional<std::string> natoms;
  std::optional<std::string> temp;
  std::optional<std::string> t_over_tc;
  std::optional<double> n0_frac;
  std::string ensemble;
  std::string gc_mode = "closed";
  double cutoff_tol = 1e-10;
  std::optional<double> grid_extent;
  int grid_points = 2001;
  std::optional<std::string> axis;
  long long canonical_cap = 1600;
  bool markers = false;
  std::string format = "csv";
};

struct CommandResult {
  std::string csv;
  int exit_code = 0;  // 3 when some rows carry error markers
};

/// Runs one subcommand and returns its CSV text. Throws UsageError for bad
/// arguments and bosegas::Error for numerical failures.
CommandResult run_command(const Options& opt);

std::string version();

}  // namespace bosegas::cli
