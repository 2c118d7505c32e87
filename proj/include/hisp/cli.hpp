#pragma once

namespace hisp {

/// Entry point of the `hisp` command: run, verify, dump. Returns the process
/// exit status (0 success, 1 failed check or I/O error, 2 bad arguments).
int run_cli(int argc, char** argv);

}  // namespace hisp
