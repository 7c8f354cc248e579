#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace awh {

// All floats serialize with 17 significant digits so CSV round-trips
// are bit exact.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Comma-separated, '.' decimal, LF endings, one header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell((long long)v); }
  CsvWriter& cell(long v) { return cell((long long)v); }
  CsvWriter& cell(std::size_t v) { return cell((long long)v); }
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  bool row_started_ = false;
  void sep();
};

}  // namespace awh
