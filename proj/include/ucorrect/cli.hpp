#pragma once

#include <iosfwd>

namespace ucorrect {

// Entry point of the `ucorrect` tool. Returns 0 on success, 1 on usage
// errors and 2 on data errors.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace ucorrect
