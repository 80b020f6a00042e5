#pragma once

namespace stpod::cli {

/// Entry point of the `stpod` command line tool. Returns the process exit
/// code; errors are reported on stderr.
int run(int argc, char** argv);

}  // namespace stpod::cli
