#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dgl::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage errors and 2 on data or I/O errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dgl::cli
