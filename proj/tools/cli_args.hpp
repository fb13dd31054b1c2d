#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace credanno::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutputDirEnv = "CREDANNO_OUTPUT_DIR";

struct CliInvocation {
  std::string subcommand;  // synth | train | eval | ablate
  std::string config_path;
  std::vector<std::string> overrides;  // "key=value", applied after the file
  std::string output_dir;
  std::string checkpoint;  // eval only
  bool help = false;
  std::string help_text;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws UsageError for unknown subcommands, a missing --config or a
// malformed --set. The output directory is --out if given, otherwise
// $CREDANNO_OUTPUT_DIR, otherwise "credanno_out".
CliInvocation parse_cli(int argc, const char* const* argv);

}  // namespace credanno::cli
