#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wcsplit {

// Exit codes: 0 success, 1 verification failed, 2 error (JSON on `err`).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wcsplit
