#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sciforge::csv {

// RFC 4180 style: comma separated, double-quoted fields may hold commas,
// quotes ("") and line breaks. A trailing newline does not add a row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based line number in the source where each row starts.
    std::vector<std::size_t> row_lines;
};

Table parse(std::string_view content);

std::string quote_field(std::string_view field);

}  // namespace sciforge::csv
