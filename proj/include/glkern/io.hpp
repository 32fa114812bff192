#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"

namespace glkern::io {

/// Ten significant digits, the precision of every emitted number.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// CSV with header `t,x,y`, t counting from 1.
inline std::string sample_csv(const RegressionSample& s) {
  std::string out = "t,x,y\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(i + 1) + ',' + num(s.x[i]) + ',' + num(s.y[i]) + '\n';
  }
  return out;
}

/// Reads a sample from CSV; the header must name `x` and `y` columns, any
/// other columns are ignored. Rows keep file order.
inline RegressionSample parse_sample_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(origin, "empty CSV");
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split(line);
  int xi = -1, yi = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "x") xi = static_cast<int>(i);
    if (header[i] == "y") yi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0) throw IoError(origin, "CSV header must contain x and y columns");
  RegressionSample s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() <= static_cast<std::size_t>(std::max(xi, yi))) {
      throw IoError(origin, "row " + std::to_string(row) + " has too few columns");
    }
    try {
      s.x.push_back(std::stod(cells[static_cast<std::size_t>(xi)]));
      s.y.push_back(std::stod(cells[static_cast<std::size_t>(yi)]));
    } catch (const std::exception&) {
      throw IoError(origin, "row " + std::to_string(row) + " is not numeric");
    }
  }
  if (s.empty()) throw IoError(origin, "CSV has no data rows");
  return s;
}

inline RegressionSample read_sample_csv(const std::filesystem::path& path) {
  return parse_sample_csv(read_file(path), path.string());
}

}  // namespace glkern::io
