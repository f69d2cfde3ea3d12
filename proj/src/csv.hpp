#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace yieldrisk::csv {

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

// Reads lines, strips a trailing '\r', skips blank lines. Tracks the 1-based
// line number of the last line returned.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}
    std::optional<std::vector<std::string>> next();
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

std::string trim(std::string_view s);

// Strict decimal parse of the whole field; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);

std::string escape(std::string_view field);

}  // namespace yieldrisk::csv
