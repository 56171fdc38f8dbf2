#pragma once

#include <string>
#include <vector>

namespace sofsyn {

/// Batch front end. Returns 0 on success, 1 when a synthesis comes back
/// infeasible or fails numerically (diagnostics are still written), and 2 on
/// input errors (bad flags, malformed files, broken preconditions).
int run_cli(const std::vector<std::string>& args);

}  // namespace sofsyn
