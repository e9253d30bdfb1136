#pragma once

namespace netlqg {

// Command-line entry point: solve | simulate | compare | full, each taking
// a builtin --scenario name or a --config file plus overrides. Returns the
// process exit status; never throws.
int cli_run(int argc, const char* const* argv);

}  // namespace netlqg
