#ifndef DSSE_CLI_HPP_
#define DSSE_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace dsse {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitInputError = 2;

// Subcommands: simulate, estimate, admm, compare, posterior, check, convert.
// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace dsse

#endif  // DSSE_CLI_HPP_
