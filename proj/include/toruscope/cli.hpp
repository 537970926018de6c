#pragma once

namespace toruscope {

/// Full command-line surface.  Returns the process exit code:
///   0 success, 1 negative verdict, 2 input error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace toruscope
