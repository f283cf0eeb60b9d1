#ifndef OWLINK_BINARY_IO_HPP
#define OWLINK_BINARY_IO_HPP

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace owlink::binio {

// Little-endian encoding independent of the host byte order.

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

inline void put_f32(std::ostream& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_f32s(std::ostream& out, std::span<const double> xs) {
    for (double x : xs) put_f32(out, x);
}

inline void need(std::istream& in, const char* what) {
    if (!in) throw std::runtime_error(std::string("truncated file while reading ") + what);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    need(in, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    need(in, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline std::string get_string(std::istream& in) {
    auto n = get_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    need(in, "string");
    return s;
}

inline void get_f32s(std::istream& in, std::span<double> xs) {
    for (auto& x : xs) x = get_f32(in);
}

inline void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

inline void expect_magic(std::istream& in, const char (&magic)[9]) {
    char b[8];
    in.read(b, 8);
    if (!in || std::string(b, 8) != std::string(magic, 8))
        throw std::runtime_error("bad file magic, expected " + std::string(magic, 8));
}

}  // namespace owlink::binio

#endif
