#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "omnifuse/errors.h"

namespace omnifuse::detail {

// Shortest text that round-trips the double exactly.
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Minimal comma-separated reader: fixed header, no quoting.
class CsvReader {
  public:
    CsvReader(std::istream &in, std::string source, std::vector<std::string> header)
        : in_(in), source_(std::move(source)), width_(header.size()) {
        std::string first;
        if (!next_line(first))
            throw ParseError(source_, 1, "empty file, expected header");
        std::string expected;
        for (std::size_t i = 0; i < header.size(); ++i)
            expected += (i ? "," : "") + header[i];
        if (first != expected)
            throw ParseError(source_, line_, "expected header '" + expected + "'");
    }

    bool next(std::vector<std::string_view> &fields) {
        do {
            if (!next_line(current_))
                return false;
        } while (current_.empty());
        fields.clear();
        std::string_view rest(current_);
        while (true) {
            auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != width_)
            fail("expected " + std::to_string(width_) + " fields, got " + std::to_string(fields.size()));
        return true;
    }

    double parse_double(std::string_view s) const {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
            fail("not a number: '" + std::string(s) + "'");
        return v;
    }

    int parse_int(std::string_view s) const {
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
            fail("not an integer: '" + std::string(s) + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string &what) const { throw ParseError(source_, line_, what); }

    std::size_t line() const { return line_; }

  private:
    bool next_line(std::string &out) {
        if (!std::getline(in_, out))
            return false;
        ++line_;
        if (!out.empty() && out.back() == '\r')
            out.pop_back();
        return true;
    }

    std::istream &in_;
    std::string source_;
    std::size_t width_;
    std::size_t line_ = 0;
    std::string current_;
};

} // namespace omnifuse::detail
