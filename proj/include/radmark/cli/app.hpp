#pragma once

#include "radmark/error.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace radmark::cli {

// 0 success, 1 validation, 2 runtime, 3 backend.
int exit_code_for(ErrorKind kind);

// Runs one `radmark` invocation. args excludes the program name. Errors are
// written to err as a single JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace radmark::cli
