#include "calib/csv.hpp"

#include "calib/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace calib::csv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\n") != std::string_view::npos;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw InputError(fmt::format("missing column '{}'", name));
}

bool Table::has_column(std::string_view name) const {
    for (const auto& h : header)
        if (h == name) return true;
    return false;
}

Table parse(std::istream& in) {
    Table table;
    std::string line;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!have_header) {
            // Strip a UTF-8 byte-order mark.
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            if (trim(line).empty()) continue;
            table.header = split_line(line);
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_line(line);
        if (fields.size() != table.header.size())
            throw InputError(fmt::format("row {}: expected {} fields, found {}", row,
                                         table.header.size(), fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw InputError("missing header row");
    return table;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
    try {
        return parse(in);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write(std::ostream& out, const Table& table) {
    auto emit = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            if (needs_quotes(fields[i])) {
                out << '"';
                for (char c : fields[i]) {
                    if (c == '"') out << '"';
                    out << c;
                }
                out << '"';
            } else {
                out << fields[i];
            }
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
}

void write(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    write(out, table);
    if (!out) throw InputError(fmt::format("write failed for '{}'", path.string()));
}

std::string format_double(double value) { return fmt::format("{}", value); }

double parse_double(std::string_view text, std::size_t row, std::string_view column) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last)
        throw InputError(
            fmt::format("row {}: cannot parse '{}' in column '{}' as a number", row, text, column));
    return value;
}

long long parse_integer(std::string_view text, std::size_t row, std::string_view column) {
    long long value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last)
        throw InputError(fmt::format("row {}: cannot parse '{}' in column '{}' as an integer", row,
                                     text, column));
    return value;
}

}  // namespace calib::csv
