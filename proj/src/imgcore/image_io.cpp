#include "dermabcd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace dermabcd {

RgbImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError("read_png: " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError("read_png: " + path.string() + ": " + msg);
    }
    RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    }
    return out;
}

namespace {

void write_png_buffer(const std::filesystem::path& path, int w, int h, png_uint_32 format,
                      const std::vector<png_byte>& buffer) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError("write_png: " + path.string() + ": " + image.message);
    }
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_png(const std::filesystem::path& path, const RgbImage& img) {
    std::vector<png_byte> buffer(img.size() * 3);
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        buffer[3 * i] = px[i][0];
        buffer[3 * i + 1] = px[i][1];
        buffer[3 * i + 2] = px[i][2];
    }
    write_png_buffer(path, img.width(), img.height(), PNG_FORMAT_RGB, buffer);
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<png_byte> buffer(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        buffer[i] = to_byte(px[i]);
    }
    write_png_buffer(path, img.width(), img.height(), PNG_FORMAT_GRAY, buffer);
}

namespace {

struct PgmData {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<int> values;
};

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    char c = 0;
    while (in.get(c)) {
        if (c == '#') {
            std::string skip;
            std::getline(in, skip);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) {
                break;
            }
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

PgmData read_pgm_data(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("read_pgm: cannot open " + path.string());
    }
    const std::string magic = next_token(in);
    if (magic != "P5" && magic != "P2") {
        throw IoError("read_pgm: " + path.string() + ": not a PGM file");
    }
    PgmData d;
    try {
        d.width = std::stoi(next_token(in));
        d.height = std::stoi(next_token(in));
        d.maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw IoError("read_pgm: " + path.string() + ": malformed header");
    }
    if (d.width <= 0 || d.height <= 0 || d.maxval <= 0 || d.maxval > 255) {
        throw IoError("read_pgm: " + path.string() + ": unsupported header values");
    }
    const std::size_t n = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height);
    d.values.resize(n);
    if (magic == "P5") {
        std::vector<char> raw(n);
        in.read(raw.data(), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw IoError("read_pgm: " + path.string() + ": truncated pixel data");
        }
        for (std::size_t i = 0; i < n; ++i) {
            d.values[i] = static_cast<unsigned char>(raw[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(in >> d.values[i])) {
                throw IoError("read_pgm: " + path.string() + ": truncated pixel data");
            }
        }
    }
    return d;
}

void write_pgm_bytes(const std::filesystem::path& path, int w, int h,
                     const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("write_pgm: cannot open " + path.string());
    }
    out << "P5\n" << w << ' ' << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write_pgm: write failed for " + path.string());
    }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    const auto d = read_pgm_data(path);
    GrayImage out(d.width, d.height);
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<double>(d.values[i]) / d.maxval;
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<std::uint8_t> bytes(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        bytes[i] = to_byte(px[i]);
    }
    write_pgm_bytes(path, img.width(), img.height(), bytes);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    const auto d = read_pgm_data(path);
    BinaryMask out(d.width, d.height);
    auto bits = out.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = 2 * d.values[i] > d.maxval ? 1 : 0;
    }
    return out;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> bytes(mask.size());
    auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bytes[i] = bits[i] ? 255 : 0;
    }
    write_pgm_bytes(path, mask.width(), mask.height(), bytes);
}

}  // namespace dermabcd
