#pragma once

#include <iostream>

namespace affectrag {

// Multi-subcommand front end. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 upstream-service failure.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace affectrag
