#ifndef STORESENSE_CLI_HPP
#define STORESENSE_CLI_HPP

#include <iosfwd>

namespace storesense {

/// Entry point of the `storesense` tool. Failures print one JSON line
/// {"error": kind, "message": text} to `err` and return nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace storesense

#endif  // STORESENSE_CLI_HPP
