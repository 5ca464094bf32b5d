#ifndef DEEPCAL_TOOLS_CLI_H_
#define DEEPCAL_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace deepcal::cli {

enum ExitCode {
  kOk = 0,
  kConfigError = 2,
  kNumericError = 3,
  kDataError = 4,
};

// Runs one subcommand. `args` excludes the program name. Results that go to
// standard output are written to `out`; diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Manifest path written next to `output`, or deepcal-<subcommand> in the
// working directory when the output is standard output.
std::string ManifestPath(const std::string& subcommand,
                         const std::string& output);

}  // namespace deepcal::cli

#endif  // DEEPCAL_TOOLS_CLI_H_
