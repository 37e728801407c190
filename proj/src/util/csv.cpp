#include "sciforge/util/csv.hpp"

#include <stdexcept>

namespace sciforge::csv {

Table parse(std::string_view content) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;
    std::vector<std::string> current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // A lone empty field means a blank line; skip it.
        if (!(current.size() == 1 && current[0].empty())) {
            records.push_back(std::move(current));
            record_lines.push_back(record_line);
        }
        current.clear();
    };

    if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
            continue;
        } else if (c == '\n') {
            end_record();
            ++line;
            record_line = line;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw std::runtime_error("csv: unterminated quoted field starting on line " +
                                 std::to_string(record_line));
    }
    if (field_started || !field.empty() || !current.empty()) end_record();

    Table table;
    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        table.rows.push_back(std::move(records[i]));
        table.row_lines.push_back(record_lines[i]);
    }
    return table;
}

std::string quote_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

}  // namespace sciforge::csv
