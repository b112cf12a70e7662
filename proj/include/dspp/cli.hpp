#pragma once

#include "dspp/io.hpp"

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dspp::cli {

enum ExitCode : int { ok = 0, input_error = 2, solver_failure = 3, infeasible = 4 };

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Where the energy comes from: a JSON energy file, or two distance CSVs
/// with a named metric energy.
struct EnergyInput {
  std::string dense_energy;
  std::string source_dist;
  std::string target_dist;
  std::string energy = "gw";
  double sigma = 0.2;
};

struct BoundsArgs {
  EnergyInput input;
  int samples = 10;
  std::uint64_t seed = 0x5eed;
};

struct MatchArgs {
  EnergyInput input;
  int samples = 10;
  std::optional<int> injective;  // match only the first k source points
  std::string fuzzy;             // CSV path for the fuzzy coupling
  std::string pins;              // JSON path of known correspondences
  std::uint64_t seed = 0x5eed;
};

struct ArrangeArgs {
  std::string features;
  std::string dist;
  std::string grid;  // "RxC"
  long swaps = 0;
  int samples = 10;
  std::uint64_t seed = 0;
};

struct UpsampleArgs {
  EnergyInput input;  // fine distances
  std::string coarse; // JSON pairs of fine indices
  std::string mode = "limited";
  double rho = -1.0;
  double keep_frac = 0.2;
  int samples = 10;
  std::uint64_t seed = 0x5eed;
};

struct OracleArgs {
  EnergyInput input;
  std::optional<int> injective;
};

Json cmd_bounds(const BoundsArgs& args);
/// Also writes the fuzzy coupling when args.fuzzy is set.
Json cmd_match(const MatchArgs& args);
Json cmd_arrange(const ArrangeArgs& args);
Json cmd_upsample(const UpsampleArgs& args);
Json cmd_oracle(const OracleArgs& args);

/// Parses `args` (args[0] is the program name), runs the subcommand and
/// prints its JSON result to `out`. Errors go to `err`; the return value is
/// the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dspp::cli
