#include "owlink/tsv.hpp"

#include <zlib.h>

#include <cstdio>

#include "owlink/core.hpp"

namespace owlink {

namespace {

bool is_gz(const std::filesystem::path& p) { return p.extension() == ".gz"; }

}  // namespace

struct LineReader::Impl {
    gzFile file = nullptr;
    std::string buf;
};

LineReader::LineReader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()), path_(path) {
    if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
    // gzopen transparently reads uncompressed input as well
    impl_->file = gzopen(path.c_str(), "rb");
    if (!impl_->file) throw DataError("cannot open " + path.string());
    impl_->buf.resize(1 << 16);
}

LineReader::~LineReader() {
    if (impl_ && impl_->file) gzclose(impl_->file);
}

bool LineReader::next(std::string& line) {
    line.clear();
    bool any = false;
    while (gzgets(impl_->file, impl_->buf.data(), static_cast<int>(impl_->buf.size()))) {
        any = true;
        std::string_view chunk(impl_->buf.data());
        if (!chunk.empty() && chunk.back() == '\n') {
            chunk.remove_suffix(1);
            line.append(chunk);
            break;
        }
        line.append(chunk);
    }
    if (!any) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no_;
    return true;
}

struct LineWriter::Impl {
    gzFile gz = nullptr;
    std::FILE* plain = nullptr;
};

LineWriter::LineWriter(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()), path_(path) {
    if (is_gz(path))
        impl_->gz = gzopen(path.c_str(), "wb");
    else
        impl_->plain = std::fopen(path.c_str(), "wb");
    if (!impl_->gz && !impl_->plain) throw std::runtime_error("cannot write " + path.string());
}

LineWriter::~LineWriter() { close(); }

void LineWriter::write_line(std::string_view line) {
    if (impl_->gz) {
        gzwrite(impl_->gz, line.data(), static_cast<unsigned>(line.size()));
        gzputc(impl_->gz, '\n');
    } else if (impl_->plain) {
        std::fwrite(line.data(), 1, line.size(), impl_->plain);
        std::fputc('\n', impl_->plain);
    } else {
        throw std::runtime_error("write after close: " + path_.string());
    }
}

void LineWriter::close() {
    if (impl_->gz) gzclose(impl_->gz);
    if (impl_->plain) std::fclose(impl_->plain);
    impl_->gz = nullptr;
    impl_->plain = nullptr;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string join_tabs(const std::vector<std::string_view>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back('\t');
        out.append(fields[i]);
    }
    return out;
}

}  // namespace owlink
