#include "secbench/csv.hpp"

#include "secbench/common.hpp"

namespace secbench {

CsvDocument parse_csv(std::string_view content) {
    CsvDocument doc;
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool record_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        record_started = true;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
        record_started = false;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted CSV field");
    if (record_started || !field.empty()) end_record();

    std::size_t row_index = 0;
    // Leading comment lines ("# key: value") carry file metadata.
    while (row_index < records.size() && records[row_index].size() >= 1 &&
           !records[row_index][0].empty() && records[row_index][0][0] == '#') {
        std::string line = join(records[row_index], ",");
        doc.comments.push_back(trim(line.substr(1)));
        ++row_index;
    }
    if (row_index >= records.size())
        throw ParseError("CSV file has no header row");
    doc.header = records[row_index++];
    for (; row_index < records.size(); ++row_index) {
        auto row = records[row_index];
        if (row.size() == 1 && trim(row[0]).empty()) continue;  // blank line
        if (row.size() > doc.header.size())
            throw ParseError("CSV row has more fields than the header",
                             static_cast<long>(row_index + 1));
        row.resize(doc.header.size());
        doc.rows.push_back(std::move(row));
    }
    return doc;
}

std::string csv_escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

}  // namespace secbench
