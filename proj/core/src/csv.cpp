#include "csv.hpp"

#include "trendlab/errors.hpp"

#include <fmt/format.h>

namespace trendlab::detail {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

void expect_header(std::istream& in, std::string_view expected, std::string_view what) {
    std::string header;
    if (!read_line(in, header)) {
        throw DataError(fmt::format("{}: empty input, expected header '{}'", what, expected));
    }
    if (header != expected) {
        throw DataError(
            fmt::format("{}: line 1: header '{}' does not match '{}'", what, header, expected));
    }
}

}  // namespace trendlab::detail
