#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slhyper::cli {

// Exit codes: 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Deterministic oracle report; returns true when every check passed.
bool selftest(std::ostream& out, int precision);

std::string version();

}  // namespace slhyper::cli
