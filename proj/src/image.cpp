#include "recon/image.hpp"

#include <cstring>
#include <fstream>

#include "recon/flate.hpp"

namespace recon {

namespace {

constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32_be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    put_u32_be(out, crc32(out.data() + crc_start, 4 + payload.size()));
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace

std::vector<std::uint8_t> png_encode(const Image& img) {
    if (img.width < 1 || img.height < 1 || (img.channels != 1 && img.channels != 3))
        throw InvalidInput("png: only 8-bit gray or RGB images are written");

    std::vector<std::uint8_t> out(kPngSig, kPngSig + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);                                  // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);          // color type
    ihdr.push_back(0);                                  // compression
    ihdr.push_back(0);                                  // filter method
    ihdr.push_back(0);                                  // no interlace
    put_chunk(out, "IHDR", ihdr);

    // Filter type 0 on every scanline keeps the encoder trivially
    // deterministic; size is not a concern for this pipeline.
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = img.pixels.data() + y * stride;
        raw.insert(raw.end(), row, row + stride);
    }
    put_chunk(out, "IDAT", zlib_store(raw));
    put_chunk(out, "IEND", {});
    return out;
}

Image png_decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw FormatError("png: bad signature");

    int width = 0, height = 0, channels = 0;
    bool saw_ihdr = false;
    std::vector<std::uint8_t> idat;

    std::size_t pos = 8;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = get_u32_be(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) throw IoError("png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw FormatError("png: bad IHDR length");
            width = static_cast<int>(get_u32_be(payload));
            height = static_cast<int>(get_u32_be(payload + 4));
            const int depth = payload[8], color = payload[9], interlace = payload[12];
            if (depth != 8) throw UnsupportedLayout("png: only 8-bit depth supported");
            if (color == 0) channels = 1;
            else if (color == 2) channels = 3;
            else throw UnsupportedLayout("png: only gray and RGB color types supported");
            if (interlace != 0) throw UnsupportedLayout("png: interlacing not supported");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || width < 1 || height < 1) throw FormatError("png: missing IHDR");
    if (idat.empty()) throw FormatError("png: missing IDAT");

    const std::vector<std::uint8_t> raw = zlib_inflate(idat.data(), idat.size());
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    if (raw.size() != (stride + 1) * static_cast<std::size_t>(height))
        throw FormatError("png: decompressed size mismatch");

    Image img(width, height, channels);
    std::vector<std::uint8_t> prev(stride, 0);
    const int bpp = channels;
    for (int y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[y * (stride + 1)];
        const std::uint8_t* src = raw.data() + y * (stride + 1) + 1;
        std::uint8_t* dst = img.pixels.data() + y * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw FormatError("png: unknown scanline filter");
            }
            dst[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        std::memcpy(prev.data(), dst, stride);
    }
    return img;
}

void png_write_file(const Image& img, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = png_encode(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("png: cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("png: write failed for " + path.string());
}

Image png_read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("png: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return png_decode(bytes);
}

} // namespace recon
