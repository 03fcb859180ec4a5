#pragma once

#include <iosfwd>

namespace conefield {

// Exit codes: 0 ok, 1 verification failed, 2 parse or configuration error,
// 3 numerical error. The report goes to out, messages to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conefield
