#pragma once

namespace stfreq::cli {

/// Entry point of the stfreq command line. Exit codes: 0 success, 2 usage or
/// input error, 3 independence rejected (test-indep), 4 numerical failure.
int run(int argc, char** argv);

}  // namespace stfreq::cli
