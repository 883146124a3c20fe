#pragma once

#include <iosfwd>

namespace cluster_limit::cli {

/// Entry point behind the cluster-limit binary:
///   cluster-limit <simulate|estimate|verify|limit> --config FILE [--seed S] [--out DIR]
/// Exit codes: 0 all checks pass, 1 check failure, 2 configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cluster_limit::cli
