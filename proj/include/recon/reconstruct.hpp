#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "recon/dataset.hpp"
#include "recon/image.hpp"
#include "recon/pose.hpp"

namespace recon {

/// Axis-aligned voxel grid with one occupancy bit per voxel.
struct OccupancyGrid {
    int nx = 0, ny = 0, nz = 0;
    Vec3 bounds_min;
    Vec3 bounds_max;
    std::vector<std::uint8_t> occupancy;  // 1 byte per voxel, index x + nx*(y + ny*z)

    OccupancyGrid() = default;
    OccupancyGrid(int rx, int ry, int rz, const Vec3& lo, const Vec3& hi,
                  bool filled = true);

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
    }
    bool occupied(int x, int y, int z) const { return occupancy[index(x, y, z)] != 0; }
    Vec3 voxel_center(int x, int y, int z) const;
    Vec3 voxel_size() const;
    std::size_t occupied_count() const;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> normals;                  // per vertex, unit length
    std::vector<std::array<double, 2>> uvs;     // per vertex, in [0,1]^2
};

struct ArtifactManifest {
    std::filesystem::path mesh_obj;
    std::filesystem::path mesh_mtl;
    std::filesystem::path texture_kd;
    std::filesystem::path texture_ks;
    std::filesystem::path texture_n;
};

struct PixelProjection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;  // -z in camera coordinates
};

struct CarveView {
    RigidTransform pose;  // camera-to-world
    CameraIntrinsics intrinsics;
    Image mask;           // binary, foreground = 255
};

/// Project a world point through the shared pinhole convention. Returns
/// nothing when the point is at or behind the camera plane (z_c >= 0).
std::optional<PixelProjection> project(const Vec3& point, const RigidTransform& pose,
                                       const CameraIntrinsics& k);

/// Silhouette carving: a voxel stays occupied iff every view that sees its
/// center (projection inside the image, in front of the camera) marks it
/// foreground. Voxels seen by no view are left occupied.
OccupancyGrid carve(const OccupancyGrid& grid, const std::vector<CarveView>& views);

/// Marching cubes over the 0/1 occupancy field at iso-level 0.5, canonical
/// 256-case table, vertices at cell-edge midpoints, outward normals. The
/// field is treated as surrounded by empty space, so output surfaces are
/// closed even when occupancy touches the grid boundary.
TriangleMesh extract_mesh(const OccupancyGrid& grid);

struct MaterialTextures {
    Image kd;  // diffuse
    Image ks;  // ORM layout: (occlusion unused, roughness, metalness)
    Image n;   // flat normal map
};

/// Spherical UV projection about the mesh centroid plus placeholder PBR
/// textures (kd mid-gray, roughness 0.8, metalness 0, flat normals).
MaterialTextures assign_uvs_and_materials(TriangleMesh& mesh);

std::string mesh_to_obj(const TriangleMesh& mesh, const std::string& mtl_name);
std::string material_to_mtl();

/// Write mesh.obj, mesh.mtl, texture_kd.png, texture_ks.png, texture_n.png
/// into out_dir. Byte-identical output for identical input.
ArtifactManifest export_artifacts(const TriangleMesh& mesh, const MaterialTextures& textures,
                                  const std::filesystem::path& out_dir);

struct ReconstructionResult {
    OccupancyGrid grid;
    TriangleMesh mesh;
    MaterialTextures textures;
};

/// The whole Reconstruction stage on a preprocessed archive: recover camera
/// poses from the table rows (undoing the rotational fix), carve a cubic
/// grid over [grid_min, grid_max]^3, extract and texture the mesh.
ReconstructionResult reconstruct_dataset(const DatasetArchive& archive, int resolution,
                                         double grid_min, double grid_max);

// Mesh audits used by tests and the acceptance suite.
struct MeshTopology {
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    std::size_t face_count = 0;
    bool watertight = false;  // every edge incident to exactly two triangles
    long long euler_characteristic = 0;
};
MeshTopology analyze_topology(const TriangleMesh& mesh);

/// Signed volume via the divergence theorem; positive for outward-oriented
/// closed meshes.
double mesh_signed_volume(const TriangleMesh& mesh);

} // namespace recon
