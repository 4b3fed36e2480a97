#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace meandense {

// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

// Comma-separated rows with a fixed header; fields are never quoted, so
// callers keep commas out of text cells.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), width_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    CsvWriter& operator<<(double v) { return cell(format_double(v)); }
    CsvWriter& operator<<(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& operator<<(std::uint64_t v) { return cell(std::to_string(v)); }
    CsvWriter& operator<<(int v) { return cell(std::to_string(v)); }
    CsvWriter& operator<<(std::string_view v) { return cell(v); }
    CsvWriter& operator<<(const char* v) { return cell(v); }

    // Ends the current row; throws if it has the wrong number of cells.
    void end_row() {
        if (column_ != width_)
            throw std::logic_error("csv row has " + std::to_string(column_) + " cells, header has " +
                                   std::to_string(width_));
        out_ << '\n';
        column_ = 0;
    }

private:
    CsvWriter& cell(std::string_view text) {
        if (column_) out_ << ',';
        out_ << text;
        ++column_;
        return *this;
    }

    std::ostream& out_;
    std::size_t width_;
    std::size_t column_ = 0;
};

} // namespace meandense
