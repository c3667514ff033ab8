#pragma once

#include <string>
#include <vector>

namespace rrnlab {

/// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 data
/// error. Every run writes a `run.json` with the resolved configuration
/// into the output directory (flag --out, else $RRNLAB_OUT, else ".").
int run_cli(const std::vector<std::string>& args);

}  // namespace rrnlab
