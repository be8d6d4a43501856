#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace calib::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column; throws InputError when absent.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

// Reads a comma-separated file with a header row. Fields are trimmed of
// surrounding whitespace; double-quoted fields may contain commas. Throws
// InputError on a missing file or a row whose field count differs from the
// header (row numbers are 1-based data rows).
Table read(const std::filesystem::path& path);
Table parse(std::istream& in);

void write(const std::filesystem::path& path, const Table& table);
void write(std::ostream& out, const Table& table);

// Shortest text that round-trips a double (at most 17 significant digits).
std::string format_double(double value);

double parse_double(std::string_view text, std::size_t row, std::string_view column);
long long parse_integer(std::string_view text, std::size_t row, std::string_view column);

}  // namespace calib::csv
