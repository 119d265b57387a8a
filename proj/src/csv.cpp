#include <imbcal/csv.hpp>
#include <imbcal/errors.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace imbcal {

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    std::string available;
    for (const auto& h : header) {
        available += (available.empty() ? "" : ", ") + h;
    }
    throw IngestionError("unknown column '" + std::string(name) + "'; available columns: " + available);
}

CsvTable parse_csv_string(std::string_view text)
{
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        quoted_field = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || quoted_field) {
                throw IngestionError("csv line " + std::to_string(line) + ": quote inside an unquoted field");
            }
            in_quotes = true;
            quoted_field = true;
            quote_line = line;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                break;
            }
            end_record();
            ++line;
            break;
        case '\n':
            end_record();
            ++line;
            break;
        default:
            if (quoted_field) {
                throw IngestionError("csv line " + std::to_string(line) + ": text after a closing quote");
            }
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw IngestionError("csv: unterminated quoted field starting on line " + std::to_string(quote_line));
    }
    if (!field.empty() || quoted_field || !record.empty()) {
        end_record();
    }

    CsvTable table;
    if (records.empty()) {
        throw IngestionError("csv: no header row");
    }
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() == 1 && records[r][0].empty()) {
            continue; // blank line
        }
        if (records[r].size() != table.header.size()) {
            throw IngestionError("csv record " + std::to_string(r + 1) + ": expected " +
                                 std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(records[r].size()));
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable parse_csv(std::istream& in)
{
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv_string(text);
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open " + path);
    }
    return parse_csv(in);
}

std::string csv_field(std::string_view value)
{
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(value);
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << csv_field(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v)
{
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

} // namespace imbcal
