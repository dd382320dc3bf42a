#pragma once

namespace blochreach::cli {

// Full CLI entry point: parses argv, dispatches to the trajectory / sweep /
// compare / defaults subcommands and maps failures to exit codes
// (0 success, 2 configuration error, 3 numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace blochreach::cli
