#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "recon/pose.hpp"

namespace recon {

/// The N x 17 camera table: one PoseRow17 per image, index-aligned with the
/// zero-based, filename-sorted image list.
struct PoseBoundsTable {
    std::vector<PoseRow17> rows;

    std::size_t size() const { return rows.size(); }
    bool operator==(const PoseBoundsTable&) const = default;
};

/// Serialize as an NPY 1.0 array of shape (N, 17), dtype <f8, C order.
/// The header dictionary is space-padded so the total header (magic through
/// the trailing newline) is a multiple of 64 bytes. Returns the byte count.
std::size_t write_npy(const PoseBoundsTable& table, std::vector<std::uint8_t>& out);

/// Parse an NPY 1.0 stream produced by write_npy or any conforming writer.
/// Accepts only dtype <f8, C order, shape (N, 17) with N >= 1.
PoseBoundsTable read_npy(const std::vector<std::uint8_t>& bytes);

std::size_t write_npy_file(const PoseBoundsTable& table, const std::filesystem::path& path);
PoseBoundsTable read_npy_file(const std::filesystem::path& path);

} // namespace recon
