#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerifyFailed = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "a:b:step" -> a, a+step, ..., up to b inclusive (within 1e-9 step).
std::vector<double> parse_alpha_grid(const std::string& text);

/// Strips a trailing ".csv" or ".json".
std::string output_stem(const std::string& path);

/// Entry point of the bbqlab tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbq::cli
