#include "railvib/detail/csv.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>

namespace railvib::detail {

std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw IoError("number formatting failed");
    return std::string(buf.data(), ptr);
}

bool try_parse_double(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

bool try_parse_long(std::string_view s, long& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path + ": read failed");
    return content;
}

void split_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

}  // namespace

CsvReader::CsvReader(const std::string& path) : path_(path), content_(slurp(path)) {
    read_header();
}

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& header)
    : CsvReader(path) {
    if (header_ != header) {
        std::string expected;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) expected += ',';
            expected += header[i];
        }
        throw ParseError(path_ + ": expected header '" + expected + "'");
    }
}

void CsvReader::read_header() {
    std::vector<std::string_view> fields;
    while (pos_ < content_.size()) {
        const std::size_t eol = content_.find('\n', pos_);
        std::string_view line(content_.data() + pos_,
                              (eol == std::string::npos ? content_.size() : eol) - pos_);
        pos_ = (eol == std::string::npos) ? content_.size() : eol + 1;
        if (trim(line).empty()) continue;
        split_line(line, fields);
        for (auto f : fields) header_.emplace_back(f);
        return;
    }
    throw ParseError(path_ + ": empty file, header row required");
}

bool CsvReader::next(std::vector<std::string_view>& fields) {
    while (pos_ < content_.size()) {
        const std::size_t eol = content_.find('\n', pos_);
        std::string_view line(content_.data() + pos_,
                              (eol == std::string::npos ? content_.size() : eol) - pos_);
        pos_ = (eol == std::string::npos) ? content_.size() : eol + 1;
        if (trim(line).empty()) continue;
        split_line(line, fields);
        ++row_;
        if (fields.size() != header_.size()) {
            fail("expected " + std::to_string(header_.size()) + " fields, got " +
                 std::to_string(fields.size()));
        }
        return true;
    }
    return false;
}

double CsvReader::number(std::string_view field, const char* column) const {
    double v;
    if (!try_parse_double(field, v)) {
        fail(std::string("bad ") + column + " value '" + std::string(field) + "'");
    }
    return v;
}

long CsvReader::integer(std::string_view field, const char* column) const {
    long v;
    if (!try_parse_long(field, v)) {
        fail(std::string("bad ") + column + " value '" + std::string(field) + "'");
    }
    return v;
}

void CsvReader::fail(const std::string& message) const {
    throw ParseError(path_ + ": row " + std::to_string(row_) + ": " + message);
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace railvib::detail
