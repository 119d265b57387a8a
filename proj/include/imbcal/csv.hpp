#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace imbcal {

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // index of a header column; throws IngestionError listing the available ones
    std::size_t column(std::string_view name) const;
};

// RFC 4180: comma separated, double-quoted fields may hold commas, quotes
// ("") and line breaks; CRLF or LF line endings; the first record is the
// header. A UTF-8 byte order mark is skipped.
CsvTable parse_csv(std::istream& in);
CsvTable parse_csv_string(std::string_view text);
CsvTable read_csv_file(const std::string& path);

std::string csv_field(std::string_view value);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal that reads back as the same double ("%.17g" trimmed).
std::string format_double(double v);

} // namespace imbcal
