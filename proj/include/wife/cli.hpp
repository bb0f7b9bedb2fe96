#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wife {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,     // unreadable/invalid inputs, bad flags, size mismatch
    kExitWeights = 3,   // weights or binary container errors
    kExitInternal = 4,  // invariant violation, non-finite numerics, failed selftest
};

// Entry point of the `wife` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Runs the built-in invariant checks, one PASS/FAIL line each.
int run_selftest(std::ostream& out);

}  // namespace wife
