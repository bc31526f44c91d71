#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace secbench {

struct CsvDocument {
    std::vector<std::string> comments;             // leading '#' lines, prefix stripped
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;    // each padded to header size
};

// RFC-4180-style parsing: quoted fields may contain separators, doubled
// quotes, and newlines.  Leading lines starting with '#' are collected as
// comments (used for catalog metadata).
CsvDocument parse_csv(std::string_view content);

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace secbench
