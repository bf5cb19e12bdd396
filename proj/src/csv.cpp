#include "gyrad/csv.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gyrad/errors.hpp"

namespace gyrad::csv {

Writer::Writer(std::string path, std::vector<std::string> columns,
               std::vector<std::string> comments)
    : path_(std::move(path)), n_cols_(columns.size()) {
  for (const auto& c : comments) buffer_ += "# " + c + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    buffer_ += columns[i];
    buffer_ += (i + 1 < columns.size()) ? ',' : '\n';
  }
}

Writer::~Writer() {
  // A writer destroyed without close() commits nothing: on error paths the
  // output target must stay untouched.
}

void Writer::row(std::span<const double> values) {
  if (values.size() != n_cols_)
    throw invalid_parameter("csv row arity mismatch");
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.15g", values[i]);
    buffer_ += buf;
    buffer_ += (i + 1 < values.size()) ? ',' : '\n';
  }
}

void Writer::close() {
  if (closed_) return;
  closed_ = true;
  const std::string tmp = path_ + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw error("cannot open " + tmp + " for writing");
    out << buffer_;
  }
  std::filesystem::rename(tmp, path_);
}

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("cannot open csv file " + path);
  Table t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!header_seen) {
      while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
      } catch (const std::exception&) {
        throw invalid_parameter("non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != t.columns.size())
      throw invalid_parameter("ragged csv row in " + path);
    t.rows.push_back(std::move(row));
  }
  if (!header_seen) throw invalid_parameter("csv file " + path + " has no header");
  return t;
}

std::string config_hash(std::span<const std::string> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& p : parts) {
    for (unsigned char c : p) mix(c);
    mix(0x1f);
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace gyrad::csv
