#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace partsdist {

// Exit codes of the partsdist tool.
enum ExitCode : int { kExitOk = 0, kExitFitFailure = 1, kExitUsage = 2 };

// Runs `partsdist <command> [flags]`; args excludes the program name. Results go
// to out (or --out), diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Minimal CSV: header row, comma separated, optional double quotes with "" escapes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name, const std::string& source) const;  // DataError if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& source);

}  // namespace partsdist
