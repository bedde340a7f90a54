#pragma once

#include "projfinsler/cli/svg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace projfinsler::cli {

enum ExitCode : int { kExitPass = 0, kExitMathFailure = 1, kExitConfigError = 2 };

/// Command-line overrides of config fields.
struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<double> tol;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

const std::vector<std::string>& command_names();

/// Runs one job and returns its exit status: 0 pass, 1 mathematical failure
/// (report written, failing stage named on `err`), 2 configuration error.
int run(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Columnar CSV with a header row; numbers in %.12g.
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace projfinsler::cli
