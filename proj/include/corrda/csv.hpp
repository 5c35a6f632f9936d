#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "corrda/dataset.hpp"

namespace corrda {

namespace detail {

// Shortest decimal string that round-trips to the same double. Keeps CSV
// output byte-stable and load(save(x)) == x bit-identically.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_double_cell(std::string_view cell, int row, int col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw data_error("non-numeric cell at row " + std::to_string(row) + ", column " +
                     std::to_string(col));
  if (!std::isfinite(v))
    throw data_error("non-finite value at row " + std::to_string(row) + ", column " +
                     std::to_string(col));
  return v;
}

inline int parse_label_cell(std::string_view cell, int row, int col) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw data_error("label cell is not an integer at row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

// Reads a rectangular numeric CSV with a header row.
//   label_column absent  -> a column literally named "label" (if any) holds labels
//   label_column = ""    -> labels ignored even if a "label" column exists
//   label_column = name  -> that column must exist and holds labels
// Row/column numbers in error messages are 1-based; row 1 is the header.
inline SampleSet load_csv(const std::filesystem::path& path,
                          std::optional<std::string> label_column = std::nullopt) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw data_error("empty file: " + path.string());
  const auto header = detail::split_fields(lines[0]);
  const int width = static_cast<int>(header.size());
  int label_idx = -1;
  if (!label_column.has_value()) {
    for (int c = 0; c < width; ++c)
      if (header[c] == "label") label_idx = c;
  } else if (!label_column->empty()) {
    for (int c = 0; c < width; ++c)
      if (header[c] == *label_column) label_idx = c;
    if (label_idx < 0)
      throw data_error("unknown label column '" + *label_column + "' in " + path.string());
  }
  const int d = width - (label_idx >= 0 ? 1 : 0);
  const int n = static_cast<int>(lines.size()) - 1;
  if (n < 1) throw data_error("no data rows in " + path.string());
  if (d < 1) throw data_error("no feature columns in " + path.string());

  SampleSet s;
  s.features.resize(n, d);
  if (label_idx >= 0) s.labels.resize(n);
  for (int r = 0; r < n; ++r) {
    const auto fields = detail::split_fields(lines[r + 1]);
    if (static_cast<int>(fields.size()) != width)
      throw data_error("ragged row " + std::to_string(r + 2) + ": expected " +
                       std::to_string(width) + " fields, got " +
                       std::to_string(fields.size()));
    int fc = 0;
    for (int c = 0; c < width; ++c) {
      if (c == label_idx)
        s.labels[r] = detail::parse_label_cell(fields[c], r + 2, c + 1);
      else
        s.features(r, fc++) = detail::parse_double_cell(fields[c], r + 2, c + 1);
    }
  }
  if (label_idx >= 0) {
    int max_label = 0;
    for (int y : s.labels) {
      if (y < 0)
        throw data_error("negative label in " + path.string());
      max_label = std::max(max_label, y);
    }
    s.class_count = max_label + 1;
  }
  validate(s);
  return s;
}

// Header is f0..f{d-1} plus a final "label" column when labels are present.
inline void save_csv(const std::filesystem::path& path, const SampleSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write file: " + path.string());
  for (int j = 0; j < s.dim(); ++j) {
    if (j) out << ',';
    out << 'f' << j;
  }
  if (s.labelled()) out << ",label";
  out << '\n';
  for (int i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.dim(); ++j) {
      if (j) out << ',';
      out << detail::format_double(s.features(i, j));
    }
    if (s.labelled()) out << ',' << s.labels[i];
    out << '\n';
  }
  if (!out) throw data_error("write failed: " + path.string());
}

// Plain numeric matrix with generated header c0..c{cols-1}.
inline void save_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write file: " + path.string());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out << ',';
    out << 'c' << j;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw data_error("write failed: " + path.string());
}

inline Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  return load_csv(path, std::string()).features;
}

}  // namespace corrda
