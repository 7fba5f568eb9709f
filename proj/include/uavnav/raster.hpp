#pragma once

// 8-bit raster container plus the two image codecs the toolchain accepts:
// binary PGM (P5) and PNG (via libpng). Pixels are row-major, interleaved.

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "uavnav/error.hpp"

namespace uavnav {

struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 = gray, 3 = color
    std::vector<std::uint8_t> data;

    Raster() = default;
    Raster(int w, int h, int c = 1, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        if (w < 1 || h < 1 || (c != 1 && c != 3))
            throw ValidationError("raster: bad dimensions or channel count");
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    // Integer luminance; identity for gray rasters.
    int luma(int x, int y) const {
        if (channels == 1) return at(x, y);
        return (299 * at(x, y, 0) + 587 * at(x, y, 1) + 114 * at(x, y, 2)) / 1000;
    }

    bool operator==(const Raster& o) const {
        return width == o.width && height == o.height && channels == o.channels &&
               data == o.data;
    }
};

inline Raster crop(const Raster& r, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > r.width || y0 + h > r.height)
        throw ValidationError("raster: crop window out of bounds");
    Raster out(w, h, r.channels);
    for (int y = 0; y < h; ++y)
        std::memcpy(&out.data[static_cast<std::size_t>(y) * w * r.channels],
                    &r.data[(static_cast<std::size_t>(y0 + y) * r.width + x0) * r.channels],
                    static_cast<std::size_t>(w) * r.channels);
    return out;
}

inline Raster to_gray(const Raster& r) {
    if (r.channels == 1) return r;
    Raster out(r.width, r.height, 1);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
            out.at(x, y) = static_cast<std::uint8_t>(r.luma(x, y));
    return out;
}

// ---------------------------------------------------------------------------
// PGM (P5, maxval 255)
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_pgm(const Raster& r) {
    if (r.channels != 1) throw ValidationError("pgm: only single-channel rasters");
    std::string header = "P5\n" + std::to_string(r.width) + " " +
                         std::to_string(r.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), r.data.begin(), r.data.end());
    return out;
}

inline Raster decode_pgm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto token = [&]() -> std::string {
        // Skip whitespace and '#' comment lines between header fields.
        while (pos < bytes.size()) {
            if (std::isspace(bytes[pos])) { ++pos; continue; }
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
        return t;
    };
    if (token() != "P5") throw IoError("pgm: not a binary PGM (P5) file");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::exception&) {
        throw IoError("pgm: malformed header");
    }
    if (w < 1 || h < 1 || maxval != 255) throw IoError("pgm: unsupported header values");
    ++pos;  // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(w) * h;
    if (bytes.size() < pos + need) throw IoError("pgm: truncated pixel data");
    Raster r(w, h, 1);
    std::memcpy(r.data.data(), bytes.data() + pos, need);
    return r;
}

// ---------------------------------------------------------------------------
// PNG (8-bit gray or color, simplified libpng API)
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_png(const Raster& r) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(r.width);
    img.height = static_cast<png_uint_32>(r.height);
    img.format = r.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, r.data.data(), 0, nullptr))
        throw IoError(std::string("png: ") + img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, r.data.data(), 0, nullptr))
        throw IoError(std::string("png: ") + img.message);
    out.resize(size);
    return out;
}

inline Raster decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw IoError(std::string("png: ") + img.message);
    const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
    img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Raster r(static_cast<int>(img.width), static_cast<int>(img.height), gray ? 1 : 3);
    if (!png_image_finish_read(&img, nullptr, r.data.data(), 0, nullptr))
        throw IoError(std::string("png: ") + img.message);
    return r;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// Decodes PGM or PNG by sniffing the magic bytes.
inline Raster decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    if (bytes.size() >= 4 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
        bytes[3] == 'G')
        return decode_png(bytes);
    throw IoError("image: unrecognized format (want PGM P5 or PNG)");
}

inline Raster load_image(const std::filesystem::path& path) {
    return decode_image(read_file(path));
}

}  // namespace uavnav
