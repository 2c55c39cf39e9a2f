#pragma once

namespace rispm {

/// Command-line entry point: `reproduce --fig N` and `run --config PATH`
/// subcommands with --trials/--seed/--out/--workers overrides. Returns 0 on
/// success, 2 on usage errors, 1 on runtime failures.
int run_cli(int argc, char** argv);

}  // namespace rispm
