#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace recon {

std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                    std::uint32_t seed = 0);
std::uint32_t adler32(const std::uint8_t* data, std::size_t len);

/// Wrap raw bytes in a zlib stream using stored (uncompressed) deflate
/// blocks. Output is byte-for-byte deterministic.
std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw);

/// Decompress a zlib stream. Handles stored, fixed-Huffman, and
/// dynamic-Huffman deflate blocks, so streams from any standard compressor
/// are accepted. Verifies the adler32 trailer.
std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t len);

} // namespace recon
