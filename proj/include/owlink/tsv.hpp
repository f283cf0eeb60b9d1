#ifndef OWLINK_TSV_HPP
#define OWLINK_TSV_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace owlink {

/// Line reader over plain or gzip files (chosen by a ".gz" suffix).
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// Next line without the trailing newline; false at end of file.
    bool next(std::string& line);
    std::size_t line_number() const { return line_no_; }
    const std::filesystem::path& path() const { return path_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::filesystem::path path_;
    std::size_t line_no_ = 0;
};

/// Writer counterpart; gzip when the path ends in ".gz".
class LineWriter {
public:
    explicit LineWriter(const std::filesystem::path& path);
    ~LineWriter();
    LineWriter(const LineWriter&) = delete;
    LineWriter& operator=(const LineWriter&) = delete;

    void write_line(std::string_view line);
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::filesystem::path path_;
};

std::vector<std::string_view> split_tabs(std::string_view line);
std::string join_tabs(const std::vector<std::string_view>& fields);

/// Reads a record file: skips blank and '#' lines and requires exactly
/// `fields` tab-separated columns. The callback receives the columns and
/// the 1-based line number.
template <class Fn>
void read_records(const std::filesystem::path& path, std::size_t fields, Fn&& fn);

}  // namespace owlink

#include "owlink/core.hpp"

namespace owlink {

template <class Fn>
void read_records(const std::filesystem::path& path, std::size_t fields, Fn&& fn) {
    LineReader in(path);
    std::string line;
    while (in.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cols = split_tabs(line);
        if (cols.size() != fields)
            throw DataError(path.string() + ":" + std::to_string(in.line_number()) + ": malformed line (expected " +
                            std::to_string(fields) + " fields, got " + std::to_string(cols.size()) + ")");
        fn(cols, in.line_number());
    }
}

}  // namespace owlink

#endif
