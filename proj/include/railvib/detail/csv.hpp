#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "railvib/errors.hpp"

namespace railvib::detail {

// Shortest decimal that round-trips the exact double.
std::string format_double(double v);

bool try_parse_double(std::string_view s, double& out);
bool try_parse_long(std::string_view s, long& out);

std::string_view trim(std::string_view s);

// Line-oriented CSV reader over a whole file. Field views stay valid for the
// lifetime of the reader. Blank lines are skipped.
class CsvReader {
public:
    // header: required column names, matched exactly (after trimming)
    CsvReader(const std::string& path, const std::vector<std::string>& header);
    // variant that accepts any header; caller inspects header()
    explicit CsvReader(const std::string& path);

    const std::vector<std::string>& header() const { return header_; }
    const std::string& path() const { return path_; }

    // Advances to the next data row; false at end of file. Throws ParseError
    // when the field count does not match the header.
    bool next(std::vector<std::string_view>& fields);

    // 1-based index of the current data row (header not counted)
    std::size_t row() const { return row_; }

    double number(std::string_view field, const char* column) const;
    long integer(std::string_view field, const char* column) const;
    [[noreturn]] void fail(const std::string& message) const;

private:
    void read_header();

    std::string path_;
    std::string content_;
    std::size_t pos_ = 0;
    std::size_t row_ = 0;
    std::vector<std::string> header_;
};

void write_file(const std::string& path, std::string_view content);

}  // namespace railvib::detail
