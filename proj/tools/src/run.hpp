#pragma once

namespace sorterlab::cli {

// Full CLI entry point: parses argv, executes the subcommand, writes the
// artifacts. Returns the process exit status: 0 success, 2 configuration
// violation, 3 numerical truncation, 1 any other failure.
int run(int argc, const char* const* argv);

} // namespace sorterlab::cli
