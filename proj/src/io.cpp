#include "gl/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gl {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

void CsvTable::add_meta(const std::string& key, const std::string& value) {
  meta_.emplace_back(key, value);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw ConfigurationError("CSV row width mismatch");
  }
  rows_.push_back(cells);
}

void CsvTable::add_row_numeric(const std::vector<double>& cells) {
  std::vector<std::string> formatted;
  formatted.reserve(cells.size());
  for (double v : cells) formatted.push_back(format_double(v));
  add_row(formatted);
}

std::string CsvTable::render() const {
  std::string out;
  for (const auto& [k, v] : meta_) {
    out += "# " + k + "=" + v + "\n";
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out += columns_[i];
    out += (i + 1 < columns_.size()) ? "," : "\n";
  }
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      out += (i + 1 < row.size()) ? "," : "\n";
    }
  }
  return out;
}

void CsvTable::write(const std::string& path) const {
  write_text_atomic(path, render());
}

}  // namespace gl
