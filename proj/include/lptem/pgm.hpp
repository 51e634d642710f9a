#pragma once

// Binary PGM (P5) I/O. 16-bit samples are big-endian per the netpbm format;
// 8-bit files are accepted on read and widened.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lptem/error.hpp"
#include "lptem/image.hpp"

namespace lptem::pgm {

inline void write(std::ostream& os, const Image16& img, std::uint16_t maxval = 65535) {
    os << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
    std::vector<char> buf;
    if (maxval < 256) {
        buf.resize(img.size());
        auto px = img.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) buf[i] = static_cast<char>(px[i] & 0xff);
    } else {
        buf.resize(2 * img.size());
        auto px = img.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) {
            buf[2 * i] = static_cast<char>(px[i] >> 8);
            buf[2 * i + 1] = static_cast<char>(px[i] & 0xff);
        }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace detail {
inline bool next_token(std::istream& is, std::string& tok) {
    tok.clear();
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return false;
    tok.push_back(static_cast<char>(c));
    while ((c = is.peek()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(is.get()));
    return true;
}

inline std::size_t parse_positive(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw IoError(std::string("pgm: bad ") + what + " '" + tok + "'");
    return static_cast<std::size_t>(std::stoull(tok));
}
} // namespace detail

/// Reads a P5 image. Throws IoError on malformed or truncated input.
inline Image16 read(std::istream& is) {
    std::string tok;
    if (!detail::next_token(is, tok) || tok != "P5") throw IoError("pgm: missing P5 magic");
    std::string w, h, m;
    if (!detail::next_token(is, w) || !detail::next_token(is, h) || !detail::next_token(is, m))
        throw IoError("pgm: truncated header");
    const std::size_t width = detail::parse_positive(w, "width");
    const std::size_t height = detail::parse_positive(h, "height");
    const std::size_t maxval = detail::parse_positive(m, "maxval");
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) throw IoError("pgm: invalid header values");
    if (!std::isspace(is.get())) throw IoError("pgm: missing header terminator");

    Image16 img(width, height);
    const std::size_t bytes = (maxval < 256 ? 1 : 2) * img.size();
    std::vector<unsigned char> buf(bytes);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is.gcount()) != bytes) throw IoError("pgm: truncated pixel data");
    auto px = img.pixels();
    if (maxval < 256) {
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = buf[i];
    } else {
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return img;
}

inline Image16 read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return read(is);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

/// Serialized bytes of `img` (used for atomic writes and hashing).
inline std::string encode(const Image16& img) {
    std::ostringstream os(std::ios::binary);
    write(os, img);
    return std::move(os).str();
}

/// 8-bit export by linear scaling: out = round(255 * (v - lo) / (hi - lo)), clamped.
inline Image16 to_8bit(const Image16& img, std::uint16_t lo, std::uint16_t hi) {
    Image16 out(img.width(), img.height());
    const double span = hi > lo ? static_cast<double>(hi - lo) : 1.0;
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double v = std::nearbyint(255.0 * (static_cast<double>(src[i]) - lo) / span);
        dst[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

} // namespace lptem::pgm
