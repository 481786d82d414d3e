#pragma once

// Minimal CSV reading/writing for the toolkit's tabular formats.
// Fields are comma separated; double quotes protect commas and are
// doubled inside quoted fields. Lines starting with '#' are metadata
// comments and are skipped by the reader.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tradenet::csv {

std::vector<std::string> split_line(std::string_view line);

// Quotes a field only when needed.
std::string escape(std::string_view field);

// Numbers are written with 12 significant digits.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);  // "NA" when empty

// Parses a full field as a finite or infinite double; nullopt on junk.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

class Reader {
public:
    // Reads the header row immediately.
    explicit Reader(std::istream& in);

    const std::vector<std::string>& header() const { return header_; }
    // Column position by name, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
    // Like column() but throws InvalidInput naming the missing column.
    std::size_t require(std::string_view name) const;

    // Advances to the next data row; false at end of input.
    bool next();
    const std::vector<std::string>& row() const { return row_; }
    // 1-based line number of the current row in the input.
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::vector<std::string> row_;
    std::size_t line_ = 0;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    // "# key=value ..." metadata line.
    void comment(std::string_view text);
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

}  // namespace tradenet::csv
