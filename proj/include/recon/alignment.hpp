#pragma once

#include <string>
#include <vector>

#include "recon/npy.hpp"
#include "recon/pose.hpp"

namespace recon {

/// Ordered, index-aligned 3D positions (one set per tracking source).
using PointSet = std::vector<Vec3>;

struct CenteredPoints {
    PointSet points;
    Vec3 centroid;
};

struct SimilarityTransform {
    double scale = 1.0;
    Mat3 rotation;
    Vec3 translation;
};

/// Element-wise difference over the 12 view-matrix slots of two tables.
struct DifferenceMatrix {
    std::vector<std::array<double, 12>> rows;
    std::vector<double> row_norms;
    double frobenius = 0.0;
};

/// Translate the set so its centroid is the origin; returns the centroid.
CenteredPoints center(const PointSet& points);

/// Linear map T with T * src_i = dst_i for three chosen vectors; affects
/// both rotation and scale. The src triple must be well conditioned
/// (condition number <= 1e8).
Mat3 solve_three_vector_transform(const std::array<Vec3, 3>& src,
                                  const std::array<Vec3, 3>& dst);

PointSet apply_transform(const Mat3& T, const PointSet& points);

/// Least-squares similarity s,R,t minimizing sum |dst_i - s R src_i - t|^2.
/// Used as the independent cross-check of the three-vector solve.
SimilarityTransform umeyama_similarity(const PointSet& src, const PointSet& dst);

/// Greedy max-volume selection of three centered points, the triple handed
/// to solve_three_vector_transform. Returns indices into the set.
std::array<std::size_t, 3> select_alignment_triple(const PointSet& centered);

/// Full alignment of two position sets that differ by rotation + uniform
/// scale about their centroids: center both, pick a well-conditioned triple,
/// solve, and map src onto dst's frame.
PointSet align_point_sets(const PointSet& src, const PointSet& dst);

DifferenceMatrix difference_matrix(const PoseBoundsTable& a, const PoseBoundsTable& b);

/// CSV rows "index,d0,...,d11,norm" followed by a "frobenius,<total>" line.
std::string difference_matrix_to_csv(const DifferenceMatrix& dm);

// 3x3 decompositions backing the solvers (exposed for tests).
struct Svd3 {
    Mat3 u;
    Vec3 sigma;  // descending, non-negative
    Mat3 v;
};
Svd3 svd_3x3(const Mat3& a);
Mat3 mat3_inverse(const Mat3& a);

} // namespace recon
