#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace npcall::cli {

// Runs one command line (args excludes the program name). Reports go to out
// unless an output path is given; failures print an error JSON object to err.
// Returns 0 on success, 2 on invalid configuration, 1 on other failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace npcall::cli
