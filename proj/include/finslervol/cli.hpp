#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace finslervol {

/// Runs the command line tool; `args` excludes the program name. Returns 0
/// on success, 1 on a computational error and 2 on a usage error. Errors are
/// written to `err` as JSON.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1,2.5,-3" -> vector. Throws InvalidArgument.
Eigen::VectorXd parse_vector(std::string_view s);

}  // namespace finslervol
