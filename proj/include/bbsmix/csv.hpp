#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bbsmix/dataset.hpp"
#include "bbsmix/errors.hpp"

namespace bbsmix {

// Minimal CSV table: header row required, comma separated, '.' decimal,
// optional double quotes around fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col_index(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        throw InputError("column '" + name + "' not found in CSV header");
    }

    Vector numeric_column(const std::string& name) const {
        const int j = col_index(name);
        Vector out(static_cast<int>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string& cell = rows[i][j];
            try {
                std::size_t pos = 0;
                out[static_cast<int>(i)] = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InputError("non-numeric value '" + cell + "' at row " +
                                 std::to_string(i + 2) + ", column '" + name + "'");
            }
        }
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (in_quotes)
        throw InputError("unterminated quote at line " + std::to_string(line_no));
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
    }
    return fields;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
            line = line.substr(3);  // strip UTF-8 BOM
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = detail::split_csv_line(line, line_no);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size())
                throw InputError("row " + std::to_string(line_no) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) throw InputError("empty CSV file: " + path);
    if (table.rows.empty()) throw InputError("CSV has a header but no data rows: " + path);
    return table;
}

}  // namespace bbsmix
