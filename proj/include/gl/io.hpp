#pragma once

#include <map>
#include <string>
#include <vector>

#include "gl/errors.hpp"

namespace gl {

// "%.12g" rendering shared by every CSV so identical runs produce
// byte-identical bodies.
std::string format_double(double v);

// Write via temp file + rename in the target directory.
void write_text_atomic(const std::string& path, const std::string& content);

// Rows of formatted CSV with `# key=value` metadata lines up front.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_meta(const std::string& key, const std::string& value);
  void add_row(const std::vector<std::string>& cells);
  void add_row_numeric(const std::vector<double>& cells);

  std::string render() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace gl
