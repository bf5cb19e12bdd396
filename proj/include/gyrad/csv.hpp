#pragma once

#include <span>
#include <string>
#include <vector>

namespace gyrad::csv {

// CSV output with a header row and leading comment lines; 15 significant
// digits.  The file is assembled in memory and atomically renamed into
// place by close(); a writer destroyed without close() leaves the target
// untouched, so failed runs never publish partial files.
class Writer {
 public:
  Writer(std::string path, std::vector<std::string> columns,
         std::vector<std::string> comments = {});
  ~Writer();

  void row(std::span<const double> values);
  void close();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t n_cols_;
  bool closed_ = false;
};

struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
};

Table read(const std::string& path);

// FNV-1a hash of the invocation, recorded in output comments.
std::string config_hash(std::span<const std::string> parts);

}  // namespace gyrad::csv
