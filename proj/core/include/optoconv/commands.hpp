#pragma once

namespace optoconv::cli {

// Parses argv, loads the config (flag, then OPTOCONV_CONFIG, then defaults),
// applies --set overrides and dispatches the subcommand. Returns the process
// exit status: 0 ok, 1 usage, 2 invalid input or config, 3 runtime failure.
// Errors print one line to stderr, "error:<category>:<message>".
int run_cli(int argc, const char* const* argv);

}  // namespace optoconv::cli
