#include "tradenet/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "tradenet/errors.hpp"

namespace tradenet::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.emplace_back(was_quoted ? current : std::string(trim(current)));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    fields.emplace_back(was_quoted ? current : std::string(trim(current)));
    return fields;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string format_optional(const std::optional<double>& value) {
    return value ? format_number(*value) : std::string("NA");
}

std::optional<double> parse_double(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    std::string owned(field);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (end != owned.c_str() + owned.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view field) {
    field = trim(field);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
    return v;
}

Reader::Reader(std::istream& in) : in_(in) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        header_ = split_line(view);
        // Strip a UTF-8 byte order mark.
        if (!header_.empty() && header_[0].rfind("\xEF\xBB\xBF", 0) == 0) header_[0].erase(0, 3);
        return;
    }
    throw InvalidInput("CSV input has no header row");
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    return std::nullopt;
}

std::size_t Reader::require(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw InvalidInput("CSV input lacks required column '" + std::string(name) + "'");
}

bool Reader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        row_ = split_line(view);
        return true;
    }
    return false;
}

void Writer::comment(std::string_view text) {
    out_ << "# " << text << '\n';
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape(fields[i]);
    }
    out_ << '\n';
}

}  // namespace tradenet::csv
