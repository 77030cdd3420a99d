#include "recon/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace recon {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
// Returns eigenvalues (descending) and the matching orthonormal columns of V.
void sym_eigen_3x3(const Mat3& s_in, Vec3& eigvals, Mat3& v) {
    Mat3 a = s_in;
    v = Mat3::identity();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a(0, 1)) + std::abs(a(0, 2)) + std::abs(a(1, 2));
        if (off < 1e-15 * (std::abs(a(0, 0)) + std::abs(a(1, 1)) + std::abs(a(2, 2)) + 1e-300))
            break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Mat3 r = Mat3::identity();
                r(p, p) = c;
                r(q, q) = c;
                r(p, q) = s;
                r(q, p) = -s;
                a = r.transposed() * a * r;
                v = v * r;
            }
        }
    }
    // Sort eigenpairs in descending order.
    std::array<int, 3> idx = {0, 1, 2};
    const double d[3] = {a(0, 0), a(1, 1), a(2, 2)};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] > d[j]; });
    eigvals = {d[idx[0]], d[idx[1]], d[idx[2]]};
    Mat3 sorted;
    for (int c = 0; c < 3; ++c) sorted.set_col(c, v.col(idx[c]));
    v = sorted;
}

double triple_volume(const Vec3& a, const Vec3& b, const Vec3& c) {
    return std::abs(a.dot(b.cross(c)));
}

} // namespace

Svd3 svd_3x3(const Mat3& a) {
    Vec3 eig;
    Mat3 v;
    sym_eigen_3x3(a.transposed() * a, eig, v);

    Svd3 out;
    out.v = v;
    out.sigma = {std::sqrt(std::max(eig.x, 0.0)), std::sqrt(std::max(eig.y, 0.0)),
                 std::sqrt(std::max(eig.z, 0.0))};

    // A v_i = sigma_i u_i; rank-deficient directions are completed to an
    // orthonormal frame.
    const double tiny = 1e-12 * std::max(out.sigma.x, 1e-300);
    Vec3 u0, u1, u2;
    u0 = out.sigma.x > tiny ? (a * v.col(0)) / out.sigma.x : Vec3{1, 0, 0};
    if (out.sigma.y > tiny) {
        u1 = (a * v.col(1)) / out.sigma.y;
    } else {
        const Vec3 pick = std::abs(u0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        u1 = u0.cross(pick).normalized();
    }
    u2 = out.sigma.z > tiny ? (a * v.col(2)) / out.sigma.z : u0.cross(u1);
    out.u.set_col(0, u0);
    out.u.set_col(1, u1);
    out.u.set_col(2, u2);
    return out;
}

Mat3 mat3_inverse(const Mat3& a) {
    const double det = a.det();
    if (std::abs(det) < 1e-300) throw DegenerateInput("mat3_inverse: singular matrix");
    Mat3 inv;
    inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / det;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / det;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / det;
    inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / det;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / det;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / det;
    inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / det;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / det;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / det;
    return inv;
}

CenteredPoints center(const PointSet& points) {
    if (points.empty()) throw InvalidInput("center: empty point set");
    Vec3 centroid;
    for (const Vec3& p : points) centroid += p;
    centroid = centroid / static_cast<double>(points.size());
    CenteredPoints out;
    out.centroid = centroid;
    out.points.reserve(points.size());
    for (const Vec3& p : points) out.points.push_back(p - centroid);
    return out;
}

Mat3 solve_three_vector_transform(const std::array<Vec3, 3>& src,
                                  const std::array<Vec3, 3>& dst) {
    Mat3 s, d;
    for (int i = 0; i < 3; ++i) {
        s.set_col(i, src[i]);
        d.set_col(i, dst[i]);
    }
    const Svd3 svd = svd_3x3(s);
    if (!(svd.sigma.z > 0.0) || svd.sigma.x / svd.sigma.z > 1e8)
        throw DegenerateInput(
            "solve_three_vector_transform: source triple is rank deficient or "
            "ill conditioned");
    return d * mat3_inverse(s);
}

PointSet apply_transform(const Mat3& T, const PointSet& points) {
    PointSet out;
    out.reserve(points.size());
    for (const Vec3& p : points) out.push_back(T * p);
    return out;
}

SimilarityTransform umeyama_similarity(const PointSet& src, const PointSet& dst) {
    if (src.size() != dst.size())
        throw ValidationError("umeyama: point sets differ in size");
    if (src.size() < 3)
        throw InvalidInput("umeyama: need at least 3 correspondences");

    const CenteredPoints cs = center(src);
    const CenteredPoints cd = center(dst);
    const double n = static_cast<double>(src.size());

    Mat3 cov{};  // (1/n) sum dst_c src_c^T
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cov(i, j) = 0.0;
    double src_var = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3& a = cs.points[i];
        const Vec3& b = cd.points[i];
        const double av[3] = {a.x, a.y, a.z};
        const double bv[3] = {b.x, b.y, b.z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cov(r, c) += bv[r] * av[c];
        src_var += a.dot(a);
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cov(r, c) /= n;
    src_var /= n;
    if (src_var < 1e-18) throw DegenerateInput("umeyama: source points are coincident");

    const Svd3 svd = svd_3x3(cov);
    if (svd.sigma.y <= 1e-12 * std::max(svd.sigma.x, 1e-300))
        throw DegenerateInput("umeyama: correspondences are collinear");

    // Reflection guard: force det(R) = +1.
    Mat3 s_fix = Mat3::identity();
    const double d = (svd.u.det() * svd.v.det() < 0.0) ? -1.0 : 1.0;
    s_fix(2, 2) = d;

    SimilarityTransform out;
    out.rotation = svd.u * s_fix * svd.v.transposed();
    out.scale = (svd.sigma.x + svd.sigma.y + d * svd.sigma.z) / src_var;
    out.translation = cd.centroid - out.scale * (out.rotation * cs.centroid);
    return out;
}

std::array<std::size_t, 3> select_alignment_triple(const PointSet& centered) {
    if (centered.size() < 3)
        throw InvalidInput("select_alignment_triple: need at least 3 points");

    // Greedy max-determinant: longest vector, then the one maximizing the
    // spanned area, then the one maximizing the spanned volume.
    std::size_t i0 = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < centered.size(); ++i) {
        const double n = centered[i].norm();
        if (n > best) {
            best = n;
            i0 = i;
        }
    }
    std::size_t i1 = 0;
    best = -1.0;
    for (std::size_t i = 0; i < centered.size(); ++i) {
        if (i == i0) continue;
        const double a = centered[i0].cross(centered[i]).norm();
        if (a > best) {
            best = a;
            i1 = i;
        }
    }
    std::size_t i2 = 0;
    best = -1.0;
    for (std::size_t i = 0; i < centered.size(); ++i) {
        if (i == i0 || i == i1) continue;
        const double v = triple_volume(centered[i0], centered[i1], centered[i]);
        if (v > best) {
            best = v;
            i2 = i;
        }
    }
    return {i0, i1, i2};
}

PointSet align_point_sets(const PointSet& src, const PointSet& dst) {
    if (src.size() != dst.size())
        throw ValidationError("align_point_sets: size mismatch");
    const CenteredPoints cs = center(src);
    const CenteredPoints cd = center(dst);
    const std::array<std::size_t, 3> sel = select_alignment_triple(cs.points);
    const Mat3 t = solve_three_vector_transform(
        {cs.points[sel[0]], cs.points[sel[1]], cs.points[sel[2]]},
        {cd.points[sel[0]], cd.points[sel[1]], cd.points[sel[2]]});
    PointSet mapped = apply_transform(t, cs.points);
    for (Vec3& p : mapped) p += cd.centroid;
    return mapped;
}

DifferenceMatrix difference_matrix(const PoseBoundsTable& a, const PoseBoundsTable& b) {
    if (a.size() != b.size())
        throw ValidationError("difference_matrix: tables have " + std::to_string(a.size()) +
                              " and " + std::to_string(b.size()) + " rows");

    // The 12 view-matrix slots; h, w, f, m, M are skipped.
    static constexpr int kViewSlots[12] = {0, 1, 2, 3, 5, 6, 7, 8, 10, 11, 12, 13};

    DifferenceMatrix dm;
    dm.rows.reserve(a.size());
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::array<double, 12> row{};
        double sq = 0.0;
        for (int j = 0; j < 12; ++j) {
            row[j] = a.rows[i][kViewSlots[j]] - b.rows[i][kViewSlots[j]];
            sq += row[j] * row[j];
        }
        dm.rows.push_back(row);
        dm.row_norms.push_back(std::sqrt(sq));
        total += sq;
    }
    dm.frobenius = std::sqrt(total);
    return dm;
}

std::string difference_matrix_to_csv(const DifferenceMatrix& dm) {
    std::string out = "row";
    for (int j = 0; j < 12; ++j) out += ",d" + std::to_string(j);
    out += ",norm\n";
    char buf[32];
    for (std::size_t i = 0; i < dm.rows.size(); ++i) {
        out += std::to_string(i);
        for (int j = 0; j < 12; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", dm.rows[i][j]);
            out += ",";
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", dm.row_norms[i]);
        out += ",";
        out += buf;
        out += "\n";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", dm.frobenius);
    out += "frobenius,";
    out += buf;
    out += "\n";
    return out;
}

} // namespace recon
