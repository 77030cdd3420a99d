#include <doctest.h>

#include "recon/capture.hpp"
#include "recon/preprocess.hpp"
#include "recon/rng.hpp"

using namespace recon;

TEST_SUITE("preprocess") {

TEST_CASE("center crop strips equal margins") {
    Image img(640, 480, 3);
    for (int y = 0; y < 480; ++y)
        for (int x = 0; x < 640; ++x) img.at(x, y, 0) = static_cast<std::uint8_t>((x + y) & 0xff);

    const Image cropped = center_crop_square(img);
    CHECK(cropped.width == 480);
    CHECK(cropped.height == 480);
    // 80 pixels stripped from each horizontal side.
    CHECK(cropped.at(0, 0, 0) == img.at(80, 0, 0));
    CHECK(cropped.at(479, 479, 0) == img.at(559, 479, 0));

    const Image square = center_crop_square(cropped);
    CHECK(square == cropped);  // idempotent
}

TEST_CASE("odd margin loses the extra pixel at the trailing edge") {
    Image img(5, 2, 1);
    for (int x = 0; x < 5; ++x) {
        img.at(x, 0) = static_cast<std::uint8_t>(x);
        img.at(x, 1) = static_cast<std::uint8_t>(x + 10);
    }
    const Image c = center_crop_square(img);
    CHECK(c.width == 2);
    // margin 3 -> 1 leading, 2 trailing
    CHECK(c.at(0, 0) == 1);
    CHECK(c.at(1, 0) == 2);
}

TEST_CASE("resize_to_512 identity, constants, and checkerboard") {
    SUBCASE("512 input is returned unchanged") {
        Rng rng(81);
        Image img(512, 512, 3);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next() & 0xff);
        CHECK(resize_to_512(img) == img);
    }
    SUBCASE("constant image stays constant") {
        const Image img(256, 256, 3, 77);
        const Image out = resize_to_512(img);
        CHECK(out.width == 512);
        for (std::uint8_t p : out.pixels) CHECK(p == 77);
    }
    SUBCASE("1024 checkerboard lands on mid-gray") {
        Image img(1024, 1024, 1);
        for (int y = 0; y < 1024; ++y)
            for (int x = 0; x < 1024; ++x) img.at(x, y) = ((x ^ y) & 1) ? 255 : 0;
        const Image out = resize_to_512(img);
        for (int y = 1; y < 511; ++y)
            for (int x = 1; x < 511; ++x) {
                const int v = out.at(x, y);
                CHECK((v == 127 || v == 128));
            }
    }
    SUBCASE("non-square input is rejected") {
        CHECK_THROWS_AS(resize_to_512(Image(640, 480, 3)), InvalidInput);
    }
    SUBCASE("nearest keeps a binary mask binary") {
        Rng rng(82);
        Image mask(640, 640, 1);
        for (auto& p : mask.pixels) p = (rng.next() & 1) ? 255 : 0;
        const Image out = resize_to_512(mask, Resample::nearest);
        for (std::uint8_t p : out.pixels) CHECK((p == 0 || p == 255));
    }
}

TEST_CASE("intrinsics rescale matches similar triangles") {
    const CameraIntrinsics k(480, 640, 500);
    const CameraIntrinsics scaled = rescale_intrinsics(k, 640, 480);
    CHECK(scaled.height == 512);
    CHECK(scaled.width == 512);
    CHECK(scaled.focal == doctest::Approx(500.0 * 512.0 / 480.0).epsilon(1e-12));

    const CameraIntrinsics same = rescale_intrinsics(CameraIntrinsics(512, 512, 300), 512, 512);
    CHECK(same.focal == 300);
}

TEST_CASE("projection consistency through crop+resize within half a pixel") {
    // Project through the original intrinsics, map the pixel through the
    // crop+resize arithmetic, and compare with the rescaled projection.
    const CameraIntrinsics k(480, 640, 500);
    const CameraIntrinsics k2 = rescale_intrinsics(k, 640, 480);
    Rng rng(83);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-3.0, -1.0)};
        const double u = k.width / 2.0 + k.focal * p.x / -p.z;
        const double v = k.height / 2.0 - k.focal * p.y / -p.z;
        const double u2 = k2.width / 2.0 + k2.focal * p.x / -p.z;
        const double v2 = k2.height / 2.0 - k2.focal * p.y / -p.z;
        // crop offset x: (640-480)/2 = 80; y untouched; then scale by 512/480
        CHECK(std::abs((u - 80.0) * 512.0 / 480.0 - u2) < 0.5);
        CHECK(std::abs(v * 512.0 / 480.0 - v2) < 0.5);
    }
}

TEST_CASE("mask estimation on a synthetic render matches the true silhouette") {
    CaptureConfig cfg;
    cfg.frames = 4;
    cfg.intrinsics = CameraIntrinsics(512, 512, 300);
    const CaptureSession s = capture_session(cfg);

    for (int t = 0; t < 4; ++t) {
        const MaskEstimate est = estimate_mask(s.images[t]);
        CHECK_FALSE(est.low_confidence);
        const Image mask = sharpen_mask(est.mask, 0.5);

        long long inter = 0, uni = 0;
        for (std::size_t i = 0; i < mask.pixels.size(); ++i) {
            const bool a = mask.pixels[i] == 255;
            const bool b = s.silhouettes[t].pixels[i] == 255;
            inter += a && b;
            uni += a || b;
        }
        REQUIRE(uni > 0);
        CHECK(static_cast<double>(inter) / static_cast<double>(uni) >= 0.99);
    }
}

TEST_CASE("all-background image gives an all-zero mask") {
    const Image img(64, 64, 3, 13);
    const MaskEstimate est = estimate_mask(img);
    CHECK_FALSE(est.low_confidence);
    for (std::uint8_t p : est.mask.pixels) CHECK(p == 0);
}

TEST_CASE("non-uniform border raises the low-confidence warning") {
    Rng rng(84);
    Image img(64, 64, 3);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next() & 0xff);
    CHECK(estimate_mask(img).low_confidence);
}

TEST_CASE("sharpen_mask thresholds, is idempotent, and validates tau") {
    Image soft(8, 8, 1);
    for (int i = 0; i < 64; ++i) soft.pixels[i] = static_cast<std::uint8_t>(i * 4);

    const Image hard = sharpen_mask(soft, 0.5);
    for (int i = 0; i < 64; ++i) CHECK(hard.pixels[i] == (i * 4 >= 127.5 ? 255 : 0));
    CHECK(sharpen_mask(hard, 0.5) == hard);

    const Image uniform(4, 4, 1, static_cast<std::uint8_t>(0.6 * 255));
    const Image all_on = sharpen_mask(uniform, 0.5);
    for (std::uint8_t p : all_on.pixels) CHECK(p == 255);

    // monotone in tau: higher tau never adds foreground
    const Image strict = sharpen_mask(soft, 0.8);
    for (int i = 0; i < 64; ++i) CHECK(strict.pixels[i] <= hard.pixels[i]);

    CHECK_THROWS_AS(sharpen_mask(soft, 0.0), InvalidInput);
    CHECK_THROWS_AS(sharpen_mask(soft, 1.0), InvalidInput);
    CHECK_THROWS_AS(sharpen_mask(soft, -3.0), InvalidInput);
}

TEST_CASE("full stage preserves counts and updates intrinsics slots") {
    CaptureConfig cfg;
    cfg.frames = 5;
    cfg.intrinsics = CameraIntrinsics(512, 512, 300);
    const DatasetArchive input = export_session(capture_session(cfg));

    const DatasetArchive out = preprocess_stage(input);
    CHECK(out.manifest.preprocessed);
    CHECK(out.images.size() == 5);
    CHECK(out.masks.size() == 5);
    CHECK(out.poses.size() == 5);
    for (const PoseRow17& row : out.poses.rows) {
        CHECK(row[4] == 512);
        CHECK(row[9] == 512);
        CHECK(row[14] == 300);  // already 512^2 so the focal is unchanged
    }
    for (const Image& m : out.masks) {
        CHECK(m.width == 512);
        for (std::uint8_t p : m.pixels) CHECK((p == 0 || p == 255));
    }
    // view slots untouched
    for (std::size_t i = 0; i < out.poses.size(); ++i)
        for (int j : {0, 1, 2, 3, 5, 6, 7, 8, 10, 11, 12, 13})
            CHECK(out.poses.rows[i][j] == input.poses.rows[i][j]);
    CHECK_NOTHROW(unpack_dataset(pack_dataset(out)));
}

} // TEST_SUITE
