#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace gig {

/// 17 significant digits: enough to round-trip any double.
std::string format_double(double v);

/// Minimal comma-separated writer. Fields are never quoted; callers only
/// write numbers and identifiers.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, std::string_view header);

  CsvWriter& field(std::string_view v);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
};

/// Splits `line` on commas. No quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace gig
