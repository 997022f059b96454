#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gacn {

// Entry point of the gacn tool; `args` excludes the program name. Results go to
// `out` (machine-readable only), diagnostics to `err`. Returns the exit code:
// 0 on success, 1 on runtime errors, 2 on usage errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Default parent directory for datasets and runs: $GACN_OUTPUT_ROOT or "runs".
std::string output_root();

}  // namespace gacn
