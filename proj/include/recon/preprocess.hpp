#pragma once

#include "recon/dataset.hpp"
#include "recon/image.hpp"
#include "recon/pose.hpp"

namespace recon {

enum class Resample { bilinear, nearest };

/// Crop to side = min(w, h) with equal margins; an odd margin loses the
/// extra pixel at the trailing edge. Idempotent on square images.
Image center_crop_square(const Image& img);

/// Resize a square image to 512x512. Masks should pass Resample::nearest so
/// they stay binary; RGB frames use bilinear.
Image resize_to_512(const Image& img, Resample mode = Resample::bilinear);

/// Focal rescale matching center_crop_square + resize_to_512:
/// f' = f * 512 / min(w, h), h' = w' = 512.
CameraIntrinsics rescale_intrinsics(const CameraIntrinsics& k, int original_width,
                                    int original_height);

struct MaskEstimate {
    Image mask;                  // soft alpha, 0..255
    bool low_confidence = false; // border was not uniform enough
};

/// Background-removal stand-in for flat-background inputs: the background
/// color is the per-channel median of the 1-pixel border and alpha is the
/// clamped, scaled color distance from it.
MaskEstimate estimate_mask(const Image& img, double border_std_threshold = 8.0);

/// Threshold: pixel >= tau*255 -> 255, else 0. tau must lie in (0, 1).
Image sharpen_mask(const Image& mask, double tau = 0.5);

struct PreprocessConfig {
    double tau = 0.5;
    double border_std_threshold = 8.0;
};

/// The full Preprocessor stage: crop, resize, intrinsics rescale (applied to
/// the manifest and the h/w/f slots of every pose row), mask generation and
/// sharpening. Frame count and index alignment are preserved.
DatasetArchive preprocess_stage(const DatasetArchive& input,
                                const PreprocessConfig& config = {});

} // namespace recon
