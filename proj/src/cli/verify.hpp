#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bbq::cli {

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// prediction, hypercube, centroid, d2, pipeline.
const std::vector<std::string>& suite_names();

/// Runs one suite. Throws std::invalid_argument for an unknown name.
std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed);

}  // namespace bbq::cli
