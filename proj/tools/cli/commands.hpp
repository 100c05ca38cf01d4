#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace coba::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Loads or trains the classifiers named by the config.
std::vector<ClassifierHandle> build_ensemble(const RunConfig& cfg, const Dataset& corpus);

}  // namespace coba::cli
