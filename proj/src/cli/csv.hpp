#pragma once

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace bbq::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format_double(double v);

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  void write(std::ostream& out) const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Command name, parameters, seeds, tool version and UTC timestamp.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& parameters,
                             const std::vector<std::uint64_t>& seeds);

/// Writes text to `path`, throwing std::runtime_error if it cannot be written.
void write_file(const std::string& path, const std::string& text);

}  // namespace bbq::cli
