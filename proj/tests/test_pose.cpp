#include <doctest.h>

#include "recon/pose.hpp"
#include "recon/rng.hpp"

using namespace recon;

namespace {

// Independent oracle: quaternion product as the 4x4 left-multiplication
// matrix L(q) applied to r as a column vector.
Quaternion quat_mul_matrix_oracle(const Quaternion& q, const Quaternion& r) {
    const double L[4][4] = {
        {q.a, -q.b, -q.c, -q.d},
        {q.b, q.a, -q.d, q.c},
        {q.c, q.d, q.a, -q.b},
        {q.d, -q.c, q.b, q.a},
    };
    const double rv[4] = {r.a, r.b, r.c, r.d};
    double out[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i] += L[i][j] * rv[j];
    return {out[0], out[1], out[2], out[3]};
}

// Independent oracle: rotate v by computing q * (0,v) * conj(q) with the
// tested product only used through the oracle above.
Vec3 rotate_by_quat_oracle(const Quaternion& q, const Vec3& v) {
    const Quaternion pv{0.0, v.x, v.y, v.z};
    const Quaternion res = quat_mul_matrix_oracle(quat_mul_matrix_oracle(q, pv),
                                                  Quaternion{q.a, -q.b, -q.c, -q.d});
    return {res.b, res.c, res.d};
}

double quat_dist(const Quaternion& a, const Quaternion& b) {
    return std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c),
                     std::abs(a.d - b.d)});
}

double mat_dist(const Mat3& a, const Mat3& b) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace

TEST_SUITE("pose") {

TEST_CASE("quat_conjugate flips the imaginary parts") {
    const Quaternion id{1, 0, 0, 0};
    CHECK(quat_dist(quat_conjugate(id), id) == 0.0);

    const Quaternion q{0.5, 0.5, 0.5, 0.5};
    const Quaternion c = quat_conjugate(q);
    CHECK(c.a == 0.5);
    CHECK(c.b == -0.5);
    CHECK(c.c == -0.5);
    CHECK(c.d == -0.5);
}

TEST_CASE("conjugate inverts unit quaternions") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Quaternion q = rng.unit_quaternion();
        const Quaternion prod = quat_mul(q, quat_conjugate(q));
        CHECK(quat_dist(prod, {1, 0, 0, 0}) < 1e-12);
    }
}

TEST_CASE("quat_mul identity and i*j=k") {
    Rng rng(12);
    const Quaternion r = rng.unit_quaternion();
    CHECK(quat_dist(quat_mul({1, 0, 0, 0}, r), r) < 1e-15);

    const Quaternion k = quat_mul({0, 1, 0, 0}, {0, 0, 1, 0});
    CHECK(quat_dist(k, {0, 0, 0, 1}) < 1e-15);
}

TEST_CASE("quat_mul matches the matrix-representation oracle") {
    Rng rng(13);
    for (int i = 0; i < 10000; ++i) {
        const Quaternion q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)};
        const Quaternion r{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)};
        CHECK(quat_dist(quat_mul(q, r), quat_mul_matrix_oracle(q, r)) < 1e-12);
    }
}

TEST_CASE("quat_mul norm multiplicativity and associativity") {
    Rng rng(14);
    for (int i = 0; i < 2000; ++i) {
        const Quaternion q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)};
        const Quaternion r{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)};
        const Quaternion s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)};
        CHECK(std::abs(quat_mul(q, r).norm() - q.norm() * r.norm()) < 1e-12);
        CHECK(quat_dist(quat_mul(quat_mul(q, r), s), quat_mul(q, quat_mul(r, s))) < 1e-12);
    }
}

TEST_CASE("quat_delta composes back to the target") {
    const Quaternion id{1, 0, 0, 0};
    CHECK(quat_dist(quat_delta(id, id), id) < 1e-15);

    const Quaternion z90 = Quaternion::from_axis_angle({0, 0, 1}, M_PI / 2);
    CHECK(quat_dist(quat_delta(z90, id), z90) < 1e-15);

    Rng rng(15);
    for (int i = 0; i < 500; ++i) {
        const Quaternion t = rng.unit_quaternion();
        const Quaternion c = rng.unit_quaternion();
        CHECK(quat_dist(quat_mul(quat_delta(t, c), c), t) < 1e-12);
    }

    CHECK_THROWS_AS(quat_delta(id, {2, 0, 0, 0}), InvalidInput);
}

TEST_CASE("quat_to_rotmat known rotations") {
    CHECK(mat_dist(quat_to_rotmat({1, 0, 0, 0}), Mat3::identity()) == 0.0);

    const double s = std::sqrt(2.0) / 2.0;
    Mat3 expect;
    expect(0, 0) = 0;
    expect(0, 1) = -1;
    expect(1, 0) = 1;
    expect(1, 1) = 0;
    CHECK(mat_dist(quat_to_rotmat({s, 0, 0, s}), expect) < 1e-12);

    CHECK_THROWS_AS(quat_to_rotmat({0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("quat_to_rotmat agrees with the q v q^-1 oracle") {
    Rng rng(16);
    const Vec3 basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 300; ++i) {
        const Quaternion q = rng.unit_quaternion();
        const Mat3 R = quat_to_rotmat(q);
        for (const Vec3& e : basis) {
            const Vec3 want = rotate_by_quat_oracle(q, e);
            const Vec3 got = R * e;
            CHECK((want - got).norm() < 1e-12);
        }
    }
}

TEST_CASE("quat_to_rotmat double cover: q and -q give the same matrix") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        const Quaternion q = rng.unit_quaternion();
        const Quaternion neg{-q.a, -q.b, -q.c, -q.d};
        CHECK(mat_dist(quat_to_rotmat(q), quat_to_rotmat(neg)) < 1e-14);
    }
}

TEST_CASE("rotmat_to_quat canonical and round trip") {
    const Quaternion qi = rotmat_to_quat(Mat3::identity());
    CHECK(quat_dist(qi, {1, 0, 0, 0}) < 1e-15);

    // 180 degrees about x: R = diag(1,-1,-1).
    Mat3 flip;
    flip(1, 1) = -1;
    flip(2, 2) = -1;
    const Quaternion qx = rotmat_to_quat(flip);
    CHECK(quat_dist(qx, {0, 1, 0, 0}) < 1e-12);
    CHECK(mat_dist(quat_to_rotmat(qx), flip) < 1e-12);

    Rng rng(18);
    for (int i = 0; i < 10000; ++i) {
        Quaternion q = rng.unit_quaternion();
        if (q.a < 0) q = {-q.a, -q.b, -q.c, -q.d};
        const Quaternion back = rotmat_to_quat(quat_to_rotmat(q));
        CHECK(back.a >= 0.0);
        CHECK(quat_dist(back, q) < 1e-9);
    }

    Mat3 junk;
    junk(0, 0) = 2.0;
    CHECK_THROWS_AS(rotmat_to_quat(junk), InvalidInput);
}

TEST_CASE("rotmat round trip through quaternions stays on the matrix") {
    Rng rng(19);
    for (int i = 0; i < 2000; ++i) {
        const Mat3 R = rng.rotation();
        CHECK(mat_dist(quat_to_rotmat(rotmat_to_quat(R)), R) < 1e-9);
    }
}

TEST_CASE("truncate_view_matrix keeps the top three rows") {
    const ViewMatrix3x4 vi = truncate_view_matrix(Mat4{});
    CHECK(mat_dist(vi.rotation, Mat3::identity()) == 0.0);
    CHECK(vi.translation.norm() == 0.0);

    Mat4 pose;
    pose(0, 3) = 1;
    pose(1, 3) = 2;
    pose(2, 3) = 3;
    const ViewMatrix3x4 vt = truncate_view_matrix(pose);
    CHECK(vt.translation.x == 1);
    CHECK(vt.translation.y == 2);
    CHECK(vt.translation.z == 3);

    Rng rng(20);
    for (int i = 0; i < 200; ++i) {
        const RigidTransform t{rng.rotation(),
                               {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)}};
        const ViewMatrix3x4 v = truncate_view_matrix(t.to_homogeneous());
        CHECK(v.rotation.is_rotation(1e-9));
    }

    Mat4 bad;
    bad(3, 0) = 0.5;
    CHECK_THROWS_AS(truncate_view_matrix(bad), InvalidInput);
}

TEST_CASE("rotational_fix column operations") {
    const Mat3 fixed = rotational_fix(Mat3::identity());
    // (c1,c2,c3) -> (-c2, c1, c3)
    CHECK(fixed(0, 0) == 0);
    CHECK(fixed(0, 1) == 1);
    CHECK(fixed(1, 0) == -1);
    CHECK(fixed(1, 1) == 0);
    CHECK(fixed(2, 2) == 1);

    Rng rng(21);
    for (int i = 0; i < 10000; ++i) {
        const Mat3 R = rng.rotation();
        const Mat3 F = rotational_fix(R);
        CHECK(std::abs(F.det() - R.det()) < 1e-12);
        CHECK(F.orthonormality_error() < 1e-12);
        CHECK(mat_dist(rotational_fix_inverse(F), R) == 0.0);
    }
}

TEST_CASE("build_pose_row emits the flattened 3x5 order plus bounds") {
    const CameraIntrinsics k(512, 512, 500);
    const SceneBounds b(0.5, 2.0);
    const PoseRow17 row = build_pose_row({Mat3::identity(), {0, 0, 0}}, k, b);
    const PoseRow17 expect = {1, 0, 0, 0, 512, 0, 1, 0, 0, 512, 0, 0, 1, 0, 500, 0.5, 2};
    for (int i = 0; i < 17; ++i) CHECK(row[i] == expect[i]);

    // The focal always sits at index 14, h at 4, w at 9.
    Rng rng(22);
    for (int i = 0; i < 100; ++i) {
        const ViewMatrix3x4 v{rng.rotation(),
                              {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const CameraIntrinsics ki(480, 640, 321.5);
        const PoseRow17 r = build_pose_row(v, ki, b);
        CHECK(r[4] == 480);
        CHECK(r[9] == 640);
        CHECK(r[14] == 321.5);
        CHECK(r[15] == 0.5);
        CHECK(r[16] == 2.0);
    }
}

TEST_CASE("parse_pose_row inverts build_pose_row") {
    const PoseRow17 row = {1, 0, 0, 0, 512, 0, 1, 0, 0, 512, 0, 0, 1, 0, 500, 0.5, 2};
    const ParsedPoseRow p = parse_pose_row(row);
    CHECK(mat_dist(p.view.rotation, Mat3::identity()) == 0.0);
    CHECK(p.intrinsics.height == 512);
    CHECK(p.intrinsics.width == 512);
    CHECK(p.intrinsics.focal == 500);
    CHECK(p.bounds.min_dist == 0.5);
    CHECK(p.bounds.max_dist == 2.0);

    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const ViewMatrix3x4 v{rng.rotation(),
                              {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const CameraIntrinsics k(rng.uniform(1, 1000), rng.uniform(1, 1000),
                                 rng.uniform(1, 1000));
        const double m = rng.uniform(0.1, 3.0);
        const SceneBounds b(m, m + rng.uniform(0.0, 3.0));
        const PoseRow17 r = build_pose_row(v, k, b);
        const ParsedPoseRow back = parse_pose_row(r);
        const PoseRow17 again = build_pose_row(back.view, back.intrinsics, back.bounds);
        for (int j = 0; j < 17; ++j) CHECK(r[j] == again[j]);
    }

    PoseRow17 swapped = row;
    swapped[15] = 3.0;  // min > max
    CHECK_THROWS_AS(parse_pose_row(swapped), InvalidInput);

    PoseRow17 nan_row = row;
    nan_row[7] = std::nan("");
    CHECK_THROWS_WITH_AS(parse_pose_row(nan_row),
                         "parse_pose_row: non-finite value at index 7", InvalidInput);
}

TEST_CASE("rigid transform compose/inverse against homogeneous oracle") {
    Rng rng(24);
    for (int i = 0; i < 300; ++i) {
        const RigidTransform a{rng.rotation(),
                               {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const RigidTransform b{rng.rotation(),
                               {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const Mat4 want = a.to_homogeneous() * b.to_homogeneous();
        const Mat4 got = (a * b).to_homogeneous();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) CHECK(std::abs(want(r, c) - got(r, c)) < 1e-12);

        const RigidTransform inv = a.inverse();
        const RigidTransform id = a * inv;
        CHECK(mat_dist(id.rotation, Mat3::identity()) < 1e-12);
        CHECK(id.translation.norm() < 1e-12);
    }
}

} // TEST_SUITE
