#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "critmass/params.hpp"

namespace critmass::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Resolved configuration of one invocation.
struct RunConfig {
  SystemParams params;
  int grid_n = 1024;
  double box_l = 32.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  /// Subcommand block after merging config file and flags.
  nlohmann::json options = nlohmann::json::object();
};

nlohmann::json to_json(const RunConfig& config);

/// Runs `args` (without the program name). Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace critmass::cli
