#ifndef HYPERODE_CLI_HPP
#define HYPERODE_CLI_HPP

#include <string>
#include <vector>

namespace hyperode::cli {

// Runs one CLI invocation (args exclude the program name) and returns the
// process exit code: 0 all verification passed, 1 a verification block
// failed, 2 expression parse error, 3 domain/degeneracy/precondition error,
// 4 numeric failure.
int run(const std::vector<std::string>& args);

} // namespace hyperode::cli

#endif
