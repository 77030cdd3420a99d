#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace recon {

struct ZipEntry {
    std::string name;
    std::vector<std::uint8_t> data;
};

/// Write a zip with entries stored uncompressed, in the given order, with
/// fixed timestamps. Two calls with equal entries produce identical bytes.
std::vector<std::uint8_t> zip_pack(const std::vector<ZipEntry>& entries);

/// Read a zip written by zip_pack (or any zip whose members are stored
/// uncompressed). Entries come back in central-directory order.
std::vector<ZipEntry> zip_unpack(const std::vector<std::uint8_t>& bytes);

} // namespace recon
