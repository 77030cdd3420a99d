#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recon/image.hpp"
#include "recon/npy.hpp"

namespace recon {

struct DatasetManifest {
    int frames = 0;
    double height = 0.0;
    double width = 0.0;
    double focal = 0.0;
    bool preprocessed = false;       // true once masks/ has been generated
    std::int64_t created_unix = 0;   // fixed value keeps packs byte-identical
    std::string image_ext = "png";

    bool operator==(const DatasetManifest&) const = default;
};

/// The uploaded/cached capture: frames, poses_bounds table, the per-frame
/// compensation table, and (after preprocessing) the alpha masks.
struct DatasetArchive {
    DatasetManifest manifest;
    PoseBoundsTable poses;           // compensated poses_bounds, N x 17
    PoseBoundsTable compensation;    // per-frame mean deltas, N x 17
    std::vector<Image> images;       // RGB frames, index == table row
    std::vector<Image> masks;        // empty before preprocessing

    /// Throws ValidationError when counts or the staged-validity rule are
    /// violated (preprocessed archives must carry one mask per frame).
    void validate() const;
};

/// Zero-padded frame name, e.g. frame_index 3 -> "0003".
std::string frame_name(int index);

std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text);

/// Pack with deterministic member order: manifest, poses_bounds,
/// compensation, images sorted, masks sorted. Returns the zip bytes.
std::vector<std::uint8_t> pack_dataset(const DatasetArchive& archive);

/// Unpack and validate all archive invariants; missing members are reported
/// by name.
DatasetArchive unpack_dataset(const std::vector<std::uint8_t>& bytes);

} // namespace recon
