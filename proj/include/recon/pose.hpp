#pragma once

#include <array>
#include <cmath>

#include "recon/errors.hpp"

namespace recon {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw DegenerateInput("cannot normalize zero vector");
        return *this / n;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Rotation as q = a + bi + cj + dk, component order (scalar, i, j, k).
struct Quaternion {
    double a = 1.0, b = 0.0, c = 0.0, d = 0.0;

    double norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    Quaternion normalized() const {
        const double n = norm();
        if (n < 1e-12) throw InvalidInput("cannot normalize near-zero quaternion");
        return {a / n, b / n, c / n, d / n};
    }

    bool is_unit(double tol = 1e-12) const { return std::abs(norm() - 1.0) <= tol; }

    static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    /// Unit quaternion for a rotation of `angle` radians about `axis`.
    static Quaternion from_axis_angle(const Vec3& axis, double angle) {
        const Vec3 u = axis.normalized();
        const double s = std::sin(angle / 2.0);
        return {std::cos(angle / 2.0), u.x * s, u.y * s, u.z * s};
    }
};

struct Mat3 {
    // Row-major: m[row][col].
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    static Mat3 identity() { return {}; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    Vec3 col(int c) const { return {m[0][c], m[1][c], m[2][c]}; }
    void set_col(int c, const Vec3& v) { m[0][c] = v.x; m[1][c] = v.y; m[2][c] = v.z; }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += m[i][j] * m[i][j];
        return std::sqrt(s);
    }

    /// max |(MᵀM - I)_ij|, zero for an orthonormal matrix.
    double orthonormality_error() const;

    bool is_rotation(double tol = 1e-9) const {
        return orthonormality_error() <= tol && std::abs(det() - 1.0) <= tol;
    }
};

struct Mat4 {
    std::array<std::array<double, 4>, 4> m{
        {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};

    double& operator()(int r, int c) { return m[r][c]; }
    double operator()(int r, int c) const { return m[r][c]; }

    Mat4 operator*(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
};

/// Pinhole intrinsics; one focal length shared by both axes.
struct CameraIntrinsics {
    double height = 0.0;  // image height, pixels
    double width = 0.0;   // image width, pixels
    double focal = 0.0;   // focal length, pixels

    CameraIntrinsics() = default;
    CameraIntrinsics(double h, double w, double f) : height(h), width(w), focal(f) {
        if (!(h > 0.0) || !(w > 0.0) || !(f > 0.0))
            throw InvalidInput("camera intrinsics must be positive");
    }
};

/// Min/max scene distance from the camera, meters, from the depth map.
struct SceneBounds {
    double min_dist = 0.0;
    double max_dist = 0.0;

    SceneBounds() = default;
    SceneBounds(double m, double M) : min_dist(m), max_dist(M) {
        if (!(m > 0.0) || !(m <= M))
            throw InvalidInput("scene bounds require 0 < min <= max");
    }
};

/// Rotation + translation. Used for camera poses (camera-to-world, OpenGL
/// right-handed convention, camera looks along -z), anchor poses, and
/// compensation deltas.
struct RigidTransform {
    Mat3 rotation;
    Vec3 translation;

    static RigidTransform identity() { return {}; }

    /// Composition: (this ∘ other), i.e. apply `other` first.
    RigidTransform operator*(const RigidTransform& o) const {
        return {rotation * o.rotation, rotation * o.translation + translation};
    }

    RigidTransform inverse() const {
        const Mat3 rt = rotation.transposed();
        return {rt, -(rt * translation)};
    }

    Vec3 transform_point(const Vec3& p) const { return rotation * p + translation; }

    Mat4 to_homogeneous() const {
        Mat4 h;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) h(i, j) = rotation(i, j);
        }
        h(0, 3) = translation.x;
        h(1, 3) = translation.y;
        h(2, 3) = translation.z;
        return h;
    }
};

/// The 3x4 matrix [R | t] kept after dropping the homogeneous row.
struct ViewMatrix3x4 {
    Mat3 rotation;
    Vec3 translation;
};

/// One row of the poses_bounds table, element order
/// r11 r12 r13 tx h  r21 r22 r23 ty w  r31 r32 r33 tz f  m M.
using PoseRow17 = std::array<double, 17>;

struct ParsedPoseRow {
    ViewMatrix3x4 view;
    CameraIntrinsics intrinsics;
    SceneBounds bounds;
};

// --- quaternion algebra ---------------------------------------------------

/// conj(a + bi + cj + dk) = a - bi - cj - dk. Equals the inverse for unit q.
Quaternion quat_conjugate(const Quaternion& q);

/// Hamilton product n = q x r, written with the n0..n3 coefficient grouping.
Quaternion quat_mul(const Quaternion& q, const Quaternion& r);

/// q_delta = q_target * q_current^-1, with the inverse taken as the
/// conjugate. `current` must be unit to within 1e-6.
Quaternion quat_delta(const Quaternion& target, const Quaternion& current);

/// Rotation matrix of a (near-)unit quaternion; normalizes before converting.
Mat3 quat_to_rotmat(const Quaternion& q);

/// Unit quaternion of a rotation matrix, canonicalized to a >= 0.
/// R must be orthonormal with det +1 to within 1e-6.
Quaternion rotmat_to_quat(const Mat3& R);

// --- view-matrix and pose-row operations ----------------------------------

/// Drop the last row of a homogeneous pose; it must be (0,0,0,1) within 1e-9.
ViewMatrix3x4 truncate_view_matrix(const Mat4& pose);

/// Swap of the first and second column and a sign inversion of the new first
/// column: (c1,c2,c3) -> (-c2, c1, c3). Preserves the determinant.
Mat3 rotational_fix(const Mat3& R);

/// Exact inverse of rotational_fix: (d1,d2,d3) -> (d2, -d1, d3).
Mat3 rotational_fix_inverse(const Mat3& R);

/// Concatenate the (h,w,f) column to [R|t], flatten the 3x5 row-major,
/// append the scene bounds.
PoseRow17 build_pose_row(const ViewMatrix3x4& view, const CameraIntrinsics& k,
                         const SceneBounds& b);

/// Exact inverse of build_pose_row; rejects non-finite values and violated
/// bounds, naming the offending element index.
ParsedPoseRow parse_pose_row(const PoseRow17& row);

// --- small helpers shared by the other modules ----------------------------

/// Geodesic angle in radians between two rotations.
double rotation_geodesic_angle(const Mat3& a, const Mat3& b);

} // namespace recon
