#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace pofin::cli {

enum Exit : int { kPass = 0, kFail = 2, kUnknown = 3, kUsage = 4 };

// Runs one command line; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view data);

}  // namespace pofin::cli
