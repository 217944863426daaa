#pragma once

#include "plod/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace plod {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double value)
{
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

inline std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline void write_u64_le(std::ostream& out, std::uint64_t value)
{
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        bytes[static_cast<std::size_t>(i)] = static_cast<char>((value >> (8 * i)) & 0xffU);
    }
    out.write(bytes.data(), 8);
}

inline std::uint64_t read_u64_le(std::istream& in)
{
    std::array<char, 8> bytes{};
    in.read(bytes.data(), 8);
    if (in.gcount() != 8) {
        throw ConfigError("unexpected end of binary file");
    }
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)])) << (8 * i);
    }
    return value;
}

inline void write_f64_le(std::ostream& out, double value)
{
    write_u64_le(out, std::bit_cast<std::uint64_t>(value));
}

inline double read_f64_le(std::istream& in)
{
    return std::bit_cast<double>(read_u64_le(in));
}

} // namespace plod
