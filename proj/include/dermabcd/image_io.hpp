#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "dermabcd/image.hpp"

namespace dermabcd {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads an 8-bit PNG; gray and gray+alpha inputs are expanded to RGB,
/// alpha is discarded.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& img);
/// Writes a [0, 1] gray raster as an 8-bit gray PNG.
void write_png(const std::filesystem::path& path, const GrayImage& img);

/// Binary PGM (P5) or ASCII PGM (P2), 8-bit. Values are returned scaled to
/// [0, 1] by maxval.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Masks as 8-bit PGM, 0 = background and 255 = object. On read any value
/// above half of maxval is object.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace dermabcd
