#ifndef USC_DIMER_CSV_HPP
#define USC_DIMER_CSV_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace usc_dimer::csv {

/// Lossless text form of a double: 17 significant digits, `nan`, `inf`, `-inf`.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Line-oriented CSV writer. Output goes to a temporary sibling file which is
/// renamed into place on commit(), so a failed run never leaves a partial file.
class Writer {
public:
    Writer(std::filesystem::path path, std::string_view header) : path_(std::move(path)) {
        tmp_ = path_;
        tmp_ += ".tmp";
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot open " + tmp_.string() + " for writing");
        out_ << header << '\n';
    }

    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    ~Writer() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

    Writer& field(double v) { return raw(format_double(v)); }
    Writer& field(long long v) { return raw(std::to_string(v)); }
    Writer& field(std::size_t v) { return raw(std::to_string(v)); }
    Writer& field(int v) { return raw(std::to_string(v)); }
    Writer& field(bool v) { return raw(v ? "1" : "0"); }
    Writer& field(std::string_view v) { return raw(v); }

    void row(std::initializer_list<double> values) {
        for (double v : values) field(v);
        end_row();
    }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

    void commit() {
        out_.flush();
        if (!out_) throw IoError("write failed for " + tmp_.string());
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, path_, ec);
        if (ec) throw IoError("cannot rename " + tmp_.string() + ": " + ec.message());
        committed_ = true;
    }

private:
    Writer& raw(std::string_view s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }

    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool first_ = true;
    bool committed_ = false;
};

/// Writes `text` to `path` through a temporary sibling and a rename.
inline void write_text_atomically(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

} // namespace usc_dimer::csv

#endif
