#pragma once

#include <string>
#include <vector>

namespace retscreen::cli {

// Entry point behind the retscreen binary. Subcommands: synth, split, train,
// predict, refer, aggregate, report. Returns 0 on success, 1 on runtime
// errors (one machine-parsable "error: CODE: ..." line on stderr), 2 on bad
// usage.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace retscreen::cli
