#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace retscreen {

// Minimal CSV layer for the pipeline's file formats. Fields never contain
// commas, quotes or newlines, so no quoting is implemented. Lines starting
// with '#' before the header are provenance comments and are preserved.
struct CsvTable {
  std::vector<std::string> comments;  // leading '#' lines, without the '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_fields(std::string_view line, char delim = ',');

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);
std::string render_csv(const CsvTable& table);

std::string read_text_file(const std::filesystem::path& path);
// temp file + rename, so partially written outputs are never observed
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace retscreen
