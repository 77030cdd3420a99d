#include "recon/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace recon {

Image center_crop_square(const Image& img) {
    if (img.width == img.height) return img;
    const int side = std::min(img.width, img.height);
    const int off_x = (img.width - side) / 2;
    const int off_y = (img.height - side) / 2;
    Image out(side, side, img.channels);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(x + off_x, y + off_y, c);
    return out;
}

Image resize_to_512(const Image& img, Resample mode) {
    if (img.width != img.height)
        throw InvalidInput("resize_to_512: input must be square (got " +
                           std::to_string(img.width) + "x" + std::to_string(img.height) + ")");
    constexpr int kSide = 512;
    if (img.width == kSide) return img;

    Image out(kSide, kSide, img.channels);
    const double scale = static_cast<double>(img.width) / kSide;
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            const double sx = (x + 0.5) * scale - 0.5;
            const double sy = (y + 0.5) * scale - 0.5;
            if (mode == Resample::nearest) {
                const int ix = std::clamp(static_cast<int>(std::floor(sx + 0.5)), 0,
                                          img.width - 1);
                const int iy = std::clamp(static_cast<int>(std::floor(sy + 0.5)), 0,
                                          img.height - 1);
                for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(ix, iy, c);
            } else {
                const double fx = std::clamp(sx, 0.0, img.width - 1.0);
                const double fy = std::clamp(sy, 0.0, img.height - 1.0);
                const int x0 = static_cast<int>(std::floor(fx));
                const int y0 = static_cast<int>(std::floor(fy));
                const int x1 = std::min(x0 + 1, img.width - 1);
                const int y1 = std::min(y0 + 1, img.height - 1);
                const double ax = fx - x0;
                const double ay = fy - y0;
                for (int c = 0; c < img.channels; ++c) {
                    const double top = img.at(x0, y0, c) * (1.0 - ax) + img.at(x1, y0, c) * ax;
                    const double bot = img.at(x0, y1, c) * (1.0 - ax) + img.at(x1, y1, c) * ax;
                    out.at(x, y, c) =
                        static_cast<std::uint8_t>(std::lround(top * (1.0 - ay) + bot * ay));
                }
            }
        }
    }
    return out;
}

CameraIntrinsics rescale_intrinsics(const CameraIntrinsics& k, int original_width,
                                    int original_height) {
    const int side = std::min(original_width, original_height);
    if (side < 1) throw InvalidInput("rescale_intrinsics: empty source image");
    return CameraIntrinsics(512.0, 512.0, k.focal * 512.0 / side);
}

MaskEstimate estimate_mask(const Image& img, double border_std_threshold) {
    if (img.width < 3 || img.height < 3)
        throw InvalidInput("estimate_mask: image too small for a border estimate");

    // Gather the 1-pixel border.
    std::vector<std::uint8_t> border[3];
    auto push = [&](int x, int y) {
        for (int c = 0; c < img.channels; ++c) border[c].push_back(img.at(x, y, c));
    };
    for (int x = 0; x < img.width; ++x) {
        push(x, 0);
        push(x, img.height - 1);
    }
    for (int y = 1; y < img.height - 1; ++y) {
        push(0, y);
        push(img.width - 1, y);
    }

    double bg[3] = {0, 0, 0};
    bool low_confidence = false;
    for (int c = 0; c < img.channels; ++c) {
        std::vector<std::uint8_t>& ch = border[c];
        std::nth_element(ch.begin(), ch.begin() + ch.size() / 2, ch.end());
        bg[c] = ch[ch.size() / 2];
        double mean = 0.0;
        for (std::uint8_t v : ch) mean += v;
        mean /= static_cast<double>(ch.size());
        double var = 0.0;
        for (std::uint8_t v : ch) var += (v - mean) * (v - mean);
        var /= static_cast<double>(ch.size());
        if (std::sqrt(var) > border_std_threshold) low_confidence = true;
    }

    // alpha = clamp(2 * ||pixel - background||): a distance of 128 saturates.
    MaskEstimate out;
    out.low_confidence = low_confidence;
    out.mask = Image(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double sq = 0.0;
            for (int c = 0; c < img.channels; ++c) {
                const double d = img.at(x, y, c) - bg[c];
                sq += d * d;
            }
            const double dist = std::sqrt(sq / img.channels) * std::sqrt(3.0);
            out.mask.at(x, y) =
                static_cast<std::uint8_t>(std::min(255.0, std::round(2.0 * dist)));
        }
    }
    return out;
}

Image sharpen_mask(const Image& mask, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0))
        throw InvalidInput("sharpen_mask: tau must lie strictly between 0 and 1");
    if (mask.channels != 1) throw InvalidInput("sharpen_mask: mask must be single channel");
    Image out = mask;
    const double cut = tau * 255.0;
    for (std::uint8_t& p : out.pixels) p = p >= cut ? 255 : 0;
    return out;
}

DatasetArchive preprocess_stage(const DatasetArchive& input, const PreprocessConfig& config) {
    input.validate();
    if (input.images.empty()) throw ValidationError("preprocess: no frames");

    const int src_w = input.images.front().width;
    const int src_h = input.images.front().height;
    const CameraIntrinsics scaled = rescale_intrinsics(
        CameraIntrinsics(input.manifest.height, input.manifest.width, input.manifest.focal),
        src_w, src_h);

    DatasetArchive out;
    out.manifest = input.manifest;
    out.manifest.height = scaled.height;
    out.manifest.width = scaled.width;
    out.manifest.focal = scaled.focal;
    out.manifest.preprocessed = true;
    out.compensation = input.compensation;  // capture-time record, kept as-is

    out.poses = input.poses;
    for (PoseRow17& row : out.poses.rows) {
        row[4] = scaled.height;
        row[9] = scaled.width;
        row[14] = scaled.focal;
    }

    out.images.reserve(input.images.size());
    out.masks.reserve(input.images.size());
    for (const Image& src : input.images) {
        const Image frame = resize_to_512(center_crop_square(src), Resample::bilinear);
        out.images.push_back(frame);
        const MaskEstimate est = estimate_mask(frame, config.border_std_threshold);
        out.masks.push_back(sharpen_mask(est.mask, config.tau));
    }

    out.validate();
    return out;
}

} // namespace recon
