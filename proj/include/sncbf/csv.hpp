#pragma once

#include <string>
#include <vector>

namespace sncbf {

// Numeric cells in every emitted CSV use this format: %.9g, nine significant
// digits, enough to reproduce plotted values while keeping files diffable.
std::string fmt_g9(double v);

std::string join_csv(const std::vector<std::string>& cells);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

// Whole-file helpers used by determinism checks and the SVG writer.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace sncbf
