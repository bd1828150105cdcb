#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace levycal::cli {

/// Exit status: 0 success, 1 usage or input error, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace levycal::cli
