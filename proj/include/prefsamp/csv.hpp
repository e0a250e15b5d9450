#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace prefsamp {

/// Header row plus string cells. Quoted fields (RFC 4180 style) are
/// accepted; `line` keeps the 1-based source line of every row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;

  /// Column index by name, or -1.
  long find(const std::string& name) const;
  std::size_t require(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double ("nan", "inf" for non-finite).
std::string format_double(double v);
/// Parses a double; blank cells give NaN when `blank_ok`.
double parse_double(const std::string& cell, bool blank_ok, const std::string& where);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::filesystem::path path_;
};

}  // namespace prefsamp
