#pragma once

#include <string>
#include <vector>

namespace udft {

/// Entry point of the `udft` tool. Subcommands: synth, cluster, pseudo-label,
/// train-transfer, transform, train-svm, evaluate, pipeline, baseline, grid-search.
/// Returns 0 on success, 1 on a runtime failure, 2 on a usage error.
int cli_dispatch(int argc, const char* const* argv);

/// Convenience overload; args exclude the program name.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace udft
