#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "recon/errors.hpp"

namespace recon {

/// 8-bit raster, row-major, interleaved channels. channels == 1 for alpha
/// masks and previews, 3 for RGB frames.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int ch, std::uint8_t fill = 0)
        : width(w), height(h), channels(ch),
          pixels(static_cast<std::size_t>(w) * h * ch, fill) {
        if (w < 1 || h < 1 || (ch != 1 && ch != 3))
            throw InvalidInput("image: bad dimensions or channel count");
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

/// Encode as PNG (8-bit grayscale or 8-bit RGB, no interlace). Output bytes
/// are deterministic for identical pixels.
std::vector<std::uint8_t> png_encode(const Image& img);

/// Decode a PNG with 8-bit depth, color type 0 (gray) or 2 (RGB), no
/// interlace. All five scanline filters are handled.
Image png_decode(const std::vector<std::uint8_t>& bytes);

void png_write_file(const Image& img, const std::filesystem::path& path);
Image png_read_file(const std::filesystem::path& path);

} // namespace recon
