#include <doctest.h>

#include "recon/alignment.hpp"
#include "recon/rng.hpp"

using namespace recon;

namespace {

PointSet random_points(Rng& rng, int n, double span = 2.0) {
    PointSet p;
    p.reserve(n);
    for (int i = 0; i < n; ++i)
        p.push_back({rng.uniform(-span, span), rng.uniform(-span, span),
                     rng.uniform(-span, span)});
    return p;
}

double max_residual(const PointSet& a, const PointSet& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
    return m;
}

} // namespace

TEST_SUITE("alignment") {

TEST_CASE("center moves the centroid to the origin") {
    const CenteredPoints sym = center({{1, 1, 1}, {-1, -1, -1}});
    CHECK(sym.centroid.norm() == 0.0);
    CHECK((sym.points[0] - Vec3{1, 1, 1}).norm() == 0.0);

    const CenteredPoints single = center({{3, -2, 5}});
    CHECK((single.centroid - Vec3{3, -2, 5}).norm() == 0.0);
    CHECK(single.points[0].norm() == 0.0);

    Rng rng(61);
    for (int i = 0; i < 50; ++i) {
        const CenteredPoints c = center(random_points(rng, 20));
        Vec3 sum;
        for (const Vec3& p : c.points) sum += p;
        CHECK(sum.norm() / 20.0 < 1e-12);
    }

    CHECK_THROWS_AS(center({}), InvalidInput);
}

TEST_CASE("three-vector solve on the standard basis") {
    const std::array<Vec3, 3> basis = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    const Mat3 t = solve_three_vector_transform(basis, basis);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(t(i, j) - (i == j ? 1.0 : 0.0)) < 1e-15);
}

TEST_CASE("uniform scale 2 under rotation gives det 8") {
    Rng rng(62);
    for (int i = 0; i < 100; ++i) {
        const Mat3 r = rng.rotation();
        std::array<Vec3, 3> src, dst;
        for (int j = 0; j < 3; ++j) {
            src[j] = rng.unit_vector() * rng.uniform(0.5, 2.0);
            dst[j] = (r * src[j]) * 2.0;
        }
        // Skip accidentally flat triples; the solver is allowed to reject them.
        Mat3 stacked;
        for (int j = 0; j < 3; ++j) stacked.set_col(j, src[j]);
        if (std::abs(stacked.det()) < 1e-3) continue;
        const Mat3 t = solve_three_vector_transform(src, dst);
        CHECK(std::abs(t.det() - 8.0) < 1e-9);
        for (int j = 0; j < 3; ++j) CHECK((t * src[j] - dst[j]).norm() < 1e-9);
    }
}

TEST_CASE("coplanar source triple is rejected") {
    const std::array<Vec3, 3> src = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 0}};
    const std::array<Vec3, 3> dst = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    CHECK_THROWS_AS(solve_three_vector_transform(src, dst), DegenerateInput);
}

TEST_CASE("apply_transform maps the full set") {
    Rng rng(63);
    const PointSet pts = random_points(rng, 30);
    CHECK(max_residual(apply_transform(Mat3::identity(), pts), pts) == 0.0);

    Mat3 zero;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) zero(i, j) = 0.0;
    for (const Vec3& p : apply_transform(zero, pts)) CHECK(p.norm() == 0.0);
}

TEST_CASE("full alignment overlaps rotated+scaled sets") {
    Rng rng(64);
    for (int i = 0; i < 20; ++i) {
        const PointSet src = random_points(rng, 50);
        const Mat3 r = rng.rotation();
        PointSet dst;
        for (const Vec3& p : src) dst.push_back((r * p) * 2.0 + Vec3{0.4, -1.2, 2.5});
        const PointSet mapped = align_point_sets(src, dst);
        CHECK(max_residual(mapped, dst) < 1e-9);
    }
}

TEST_CASE("umeyama recovers a known similarity") {
    Rng rng(65);
    for (int i = 0; i < 50; ++i) {
        const PointSet src = random_points(rng, 25);
        const Mat3 r = rng.rotation();
        const double s = rng.uniform(0.2, 4.0);
        const Vec3 t{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        PointSet dst;
        for (const Vec3& p : src) dst.push_back((r * p) * s + t);

        const SimilarityTransform st = umeyama_similarity(src, dst);
        CHECK(std::abs(st.scale - s) < 1e-9);
        CHECK(rotation_geodesic_angle(st.rotation, r) < 1e-9);
        CHECK((st.translation - t).norm() < 1e-8);
        CHECK(st.rotation.is_rotation(1e-9));
    }

    const PointSet same = random_points(rng, 10);
    const SimilarityTransform id = umeyama_similarity(same, same);
    CHECK(std::abs(id.scale - 1.0) < 1e-12);
    CHECK(rotation_geodesic_angle(id.rotation, Mat3::identity()) < 1e-9);
    CHECK(id.translation.norm() < 1e-12);
}

TEST_CASE("umeyama never returns a reflection") {
    // Point inversion would be fit best by det = -1; the solver must stay in
    // SO(3) and return the best proper rotation instead.
    Rng rng(68);
    const PointSet src = random_points(rng, 30);
    PointSet dst;
    for (const Vec3& p : src) dst.push_back(-p);
    const SimilarityTransform st = umeyama_similarity(src, dst);
    CHECK(st.rotation.is_rotation(1e-9));
    CHECK(st.scale > 0.0);
}

TEST_CASE("umeyama rejects collinear input") {
    PointSet src, dst;
    for (int i = 0; i < 5; ++i) {
        src.push_back({static_cast<double>(i), 0, 0});
        dst.push_back({0, static_cast<double>(i), 0});
    }
    CHECK_THROWS_AS(umeyama_similarity(src, dst), DegenerateInput);
}

TEST_CASE("umeyama least-squares residual never exceeds the three-vector solve") {
    Rng rng(66);
    for (int trial = 0; trial < 10; ++trial) {
        const PointSet src = random_points(rng, 40);
        const Mat3 r = rng.rotation();
        PointSet dst;
        for (const Vec3& p : src) {
            const Vec3 noise{rng.normal(0, 1e-2), rng.normal(0, 1e-2), rng.normal(0, 1e-2)};
            dst.push_back((r * p) * 1.5 + noise);
        }

        const SimilarityTransform st = umeyama_similarity(src, dst);
        double uresid = 0.0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const Vec3 err = dst[i] - ((st.rotation * src[i]) * st.scale + st.translation);
            uresid += err.dot(err);
        }

        const PointSet mapped = align_point_sets(src, dst);
        double tresid = 0.0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const Vec3 err = dst[i] - mapped[i];
            tresid += err.dot(err);
        }
        CHECK(uresid <= tresid + 1e-12);
    }
}

TEST_CASE("difference matrix flags exactly the changed rows") {
    Rng rng(67);
    PoseBoundsTable a;
    for (int i = 0; i < 4; ++i) {
        PoseRow17 row;
        for (double& v : row) v = rng.uniform(-1, 1);
        a.rows.push_back(row);
    }

    const DifferenceMatrix zero = difference_matrix(a, a);
    CHECK(zero.frobenius == 0.0);
    for (double n : zero.row_norms) CHECK(n == 0.0);

    PoseBoundsTable b = a;
    b.rows[2][0] += 0.5;   // view slot
    b.rows[2][4] += 9.0;   // h slot; must be ignored
    const DifferenceMatrix dm = difference_matrix(a, b);
    CHECK(dm.row_norms[0] == 0.0);
    CHECK(dm.row_norms[1] == 0.0);
    CHECK(dm.row_norms[3] == 0.0);
    CHECK(std::abs(dm.row_norms[2] - 0.5) < 1e-15);

    PoseBoundsTable c;
    c.rows.push_back(a.rows[0]);
    CHECK_THROWS_AS(difference_matrix(a, c), ValidationError);
}

TEST_CASE("difference matrix norm matches a hand-computed fixture") {
    PoseBoundsTable a, b;
    PoseRow17 r0{}, r1{};
    r0.fill(0.0);
    r1.fill(0.0);
    a.rows = {r0, r1};
    b.rows = {r0, r1};
    // Perturb two view slots in row 0 (3,4 ignored-slot untouched) and one in row 1.
    b.rows[0][0] = 3.0;
    b.rows[0][5] = 4.0;
    b.rows[1][13] = 12.0;
    const DifferenceMatrix dm = difference_matrix(a, b);
    CHECK(std::abs(dm.row_norms[0] - 5.0) < 1e-15);   // sqrt(9+16)
    CHECK(std::abs(dm.row_norms[1] - 12.0) < 1e-15);
    CHECK(std::abs(dm.frobenius - 13.0) < 1e-15);     // sqrt(25+144)

    const std::string csv = difference_matrix_to_csv(dm);
    CHECK(csv.find("row,d0,d1") == 0);
    CHECK(csv.find("frobenius,13") != std::string::npos);
}

} // TEST_SUITE
