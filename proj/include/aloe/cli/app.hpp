#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aloe/common/error.hpp"

namespace aloe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitData = 4;

int exit_code_for(const Error& e);

// Rating vectors for agreement analysis: either whitespace/comma separated
// integers, or a ratings JSONL file ({case_id, status, ratings}) whose
// completed cases are flattened in file order.
std::vector<int> read_rating_vector(const std::filesystem::path& path);

// Parses argv (argv[0] is the program name), runs one subcommand and returns
// the process exit code. Results go to `out`, diagnostics to `err`.
int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aloe::cli
