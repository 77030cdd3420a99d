#include "recon/pose.hpp"

#include <algorithm>
#include <string>

namespace recon {

double Mat3::orthonormality_error() const {
    const Mat3 g = transposed() * (*this);
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            e = std::max(e, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    return e;
}

Quaternion quat_conjugate(const Quaternion& q) {
    return {q.a, -q.b, -q.c, -q.d};
}

Quaternion quat_mul(const Quaternion& q, const Quaternion& r) {
    // Component formulas for n = q x r, with q = q0 + q1 i + q2 j + q3 k and
    // r = r0 + r1 i + r2 j + r3 k.
    const double q0 = q.a, q1 = q.b, q2 = q.c, q3 = q.d;
    const double r0 = r.a, r1 = r.b, r2 = r.c, r3 = r.d;
    return {
        r0 * q0 - r1 * q1 - r2 * q2 - r3 * q3,
        r0 * q1 + r1 * q0 - r2 * q3 + r3 * q2,
        r0 * q2 + r1 * q3 + r2 * q0 - r3 * q1,
        r0 * q3 - r1 * q2 + r2 * q1 + r3 * q0,
    };
}

Quaternion quat_delta(const Quaternion& target, const Quaternion& current) {
    if (std::abs(current.norm() - 1.0) > 1e-6)
        throw InvalidInput("quat_delta: current rotation is not a unit quaternion");
    return quat_mul(target, quat_conjugate(current));
}

Mat3 quat_to_rotmat(const Quaternion& q) {
    const Quaternion u = q.normalized();  // throws InvalidInput on near-zero q
    const double a = u.a, b = u.b, c = u.c, d = u.d;
    Mat3 R;
    R(0, 0) = 1.0 - 2.0 * (c * c + d * d);
    R(0, 1) = 2.0 * (b * c - a * d);
    R(0, 2) = 2.0 * (b * d + a * c);
    R(1, 0) = 2.0 * (b * c + a * d);
    R(1, 1) = 1.0 - 2.0 * (b * b + d * d);
    R(1, 2) = 2.0 * (c * d - a * b);
    R(2, 0) = 2.0 * (b * d - a * c);
    R(2, 1) = 2.0 * (c * d + a * b);
    R(2, 2) = 1.0 - 2.0 * (b * b + c * c);
    return R;
}

Quaternion rotmat_to_quat(const Mat3& R) {
    if (R.orthonormality_error() > 1e-6 || std::abs(R.det() - 1.0) > 1e-6)
        throw InvalidInput("rotmat_to_quat: matrix is not a rotation");

    // Shepperd's method: branch on the largest of trace and diagonal entries.
    const double tr = R(0, 0) + R(1, 1) + R(2, 2);
    Quaternion q;
    if (tr > R(0, 0) && tr > R(1, 1) && tr > R(2, 2)) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        q = {0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s,
             (R(1, 0) - R(0, 1)) / s};
    } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
        const double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;
        q = {(R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s,
             (R(0, 2) + R(2, 0)) / s};
    } else if (R(1, 1) > R(2, 2)) {
        const double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;
        q = {(R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s,
             (R(1, 2) + R(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;
        q = {(R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s,
             (R(1, 2) + R(2, 1)) / s, 0.25 * s};
    }
    q = q.normalized();
    if (q.a < 0.0) q = {-q.a, -q.b, -q.c, -q.d};
    return q;
}

ViewMatrix3x4 truncate_view_matrix(const Mat4& pose) {
    const double tol = 1e-9;
    if (std::abs(pose(3, 0)) > tol || std::abs(pose(3, 1)) > tol ||
        std::abs(pose(3, 2)) > tol || std::abs(pose(3, 3) - 1.0) > tol)
        throw InvalidInput("truncate_view_matrix: last row is not (0,0,0,1)");
    ViewMatrix3x4 v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v.rotation(i, j) = pose(i, j);
    v.translation = {pose(0, 3), pose(1, 3), pose(2, 3)};
    return v;
}

Mat3 rotational_fix(const Mat3& R) {
    Mat3 out;
    out.set_col(0, -R.col(1));
    out.set_col(1, R.col(0));
    out.set_col(2, R.col(2));
    return out;
}

Mat3 rotational_fix_inverse(const Mat3& R) {
    Mat3 out;
    out.set_col(0, R.col(1));
    out.set_col(1, -R.col(0));
    out.set_col(2, R.col(2));
    return out;
}

PoseRow17 build_pose_row(const ViewMatrix3x4& view, const CameraIntrinsics& k,
                         const SceneBounds& b) {
    PoseRow17 row;
    const double hwf[3] = {k.height, k.width, k.focal};
    const double t[3] = {view.translation.x, view.translation.y, view.translation.z};
    for (int i = 0; i < 3; ++i) {
        row[i * 5 + 0] = view.rotation(i, 0);
        row[i * 5 + 1] = view.rotation(i, 1);
        row[i * 5 + 2] = view.rotation(i, 2);
        row[i * 5 + 3] = t[i];
        row[i * 5 + 4] = hwf[i];
    }
    row[15] = b.min_dist;
    row[16] = b.max_dist;
    return row;
}

ParsedPoseRow parse_pose_row(const PoseRow17& row) {
    for (int i = 0; i < 17; ++i)
        if (!std::isfinite(row[i]))
            throw InvalidInput("parse_pose_row: non-finite value at index " +
                               std::to_string(i));

    const double h = row[4], w = row[9], f = row[14];
    if (!(h > 0.0)) throw InvalidInput("parse_pose_row: non-positive height at index 4");
    if (!(w > 0.0)) throw InvalidInput("parse_pose_row: non-positive width at index 9");
    if (!(f > 0.0)) throw InvalidInput("parse_pose_row: non-positive focal at index 14");

    const double m = row[15], M = row[16];
    if (!(m > 0.0)) throw InvalidInput("parse_pose_row: non-positive min bound at index 15");
    if (m > M) throw InvalidInput("parse_pose_row: min bound exceeds max bound at index 15");

    ParsedPoseRow out;
    for (int i = 0; i < 3; ++i) {
        out.view.rotation(i, 0) = row[i * 5 + 0];
        out.view.rotation(i, 1) = row[i * 5 + 1];
        out.view.rotation(i, 2) = row[i * 5 + 2];
    }
    out.view.translation = {row[3], row[8], row[13]};
    out.intrinsics = CameraIntrinsics(h, w, f);
    out.bounds = SceneBounds(m, M);
    return out;
}

double rotation_geodesic_angle(const Mat3& a, const Mat3& b) {
    // Via the relative quaternion: atan2 keeps full precision near zero,
    // where the trace/acos form loses half the significant digits.
    const Quaternion q = rotmat_to_quat(a.transposed() * b);
    const double imag = std::sqrt(q.b * q.b + q.c * q.c + q.d * q.d);
    return 2.0 * std::atan2(imag, std::abs(q.a));
}

} // namespace recon
