#pragma once

#include <ostream>

namespace fbsim::cli {

// 0 ok, 1 usage or validation error, 2 runtime error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbsim::cli
