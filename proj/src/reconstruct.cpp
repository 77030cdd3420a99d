#include "recon/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>

#include "mc_tables.hpp"

namespace recon {

OccupancyGrid::OccupancyGrid(int rx, int ry, int rz, const Vec3& lo, const Vec3& hi,
                             bool filled)
    : nx(rx), ny(ry), nz(rz), bounds_min(lo), bounds_max(hi) {
    if (rx < 2 || ry < 2 || rz < 2)
        throw InvalidInput("occupancy grid: resolution must be at least 2 per axis");
    if (!(lo.x < hi.x) || !(lo.y < hi.y) || !(lo.z < hi.z))
        throw InvalidInput("occupancy grid: bounds min must be below max per axis");
    occupancy.assign(static_cast<std::size_t>(rx) * ry * rz, filled ? 1 : 0);
}

Vec3 OccupancyGrid::voxel_size() const {
    return {(bounds_max.x - bounds_min.x) / nx, (bounds_max.y - bounds_min.y) / ny,
            (bounds_max.z - bounds_min.z) / nz};
}

Vec3 OccupancyGrid::voxel_center(int x, int y, int z) const {
    const Vec3 s = voxel_size();
    return {bounds_min.x + (x + 0.5) * s.x, bounds_min.y + (y + 0.5) * s.y,
            bounds_min.z + (z + 0.5) * s.z};
}

std::size_t OccupancyGrid::occupied_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupancy) n += v != 0;
    return n;
}

std::optional<PixelProjection> project(const Vec3& point, const RigidTransform& pose,
                                       const CameraIntrinsics& k) {
    const Vec3 cam = pose.rotation.transposed() * (point - pose.translation);
    if (cam.z >= 0.0) return std::nullopt;
    const double inv_depth = 1.0 / -cam.z;
    return PixelProjection{k.width / 2.0 + k.focal * cam.x * inv_depth,
                           k.height / 2.0 - k.focal * cam.y * inv_depth, -cam.z};
}

OccupancyGrid carve(const OccupancyGrid& grid, const std::vector<CarveView>& views) {
    if (views.empty()) throw ValidationError("carve: no views supplied");
    for (std::size_t i = 0; i < views.size(); ++i) {
        const CarveView& v = views[i];
        if (v.mask.channels != 1 ||
            v.mask.width != static_cast<int>(v.intrinsics.width) ||
            v.mask.height != static_cast<int>(v.intrinsics.height))
            throw ValidationError("carve: view " + std::to_string(i) +
                                  " mask does not match its intrinsics");
    }

    OccupancyGrid out = grid;
    for (int z = 0; z < grid.nz; ++z) {
        for (int y = 0; y < grid.ny; ++y) {
            for (int x = 0; x < grid.nx; ++x) {
                const std::size_t idx = grid.index(x, y, z);
                if (!out.occupancy[idx]) continue;
                const Vec3 center = grid.voxel_center(x, y, z);
                for (const CarveView& view : views) {
                    const auto p = project(center, view.pose, view.intrinsics);
                    if (!p) continue;
                    const int px = static_cast<int>(std::floor(p->u));
                    const int py = static_cast<int>(std::floor(p->v));
                    if (px < 0 || py < 0 || px >= view.mask.width || py >= view.mask.height)
                        continue;
                    if (view.mask.at(px, py) < 128) {
                        out.occupancy[idx] = 0;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

namespace {

// Sample lattice with a one-sample empty apron around the grid, so that
// occupancy touching the boundary still produces a closed surface.
struct Lattice {
    const OccupancyGrid& grid;

    double value(int i, int j, int k) const {
        const int x = i - 1, y = j - 1, z = k - 1;
        if (x < 0 || y < 0 || z < 0 || x >= grid.nx || y >= grid.ny || z >= grid.nz)
            return 0.0;
        return grid.occupied(x, y, z) ? 1.0 : 0.0;
    }

    Vec3 position(int i, int j, int k) const {
        const Vec3 s = grid.voxel_size();
        return {grid.bounds_min.x + (i - 0.5) * s.x, grid.bounds_min.y + (j - 0.5) * s.y,
                grid.bounds_min.z + (k - 0.5) * s.z};
    }

    Vec3 gradient(int i, int j, int k) const {
        const Vec3 s = grid.voxel_size();
        return {(value(i + 1, j, k) - value(i - 1, j, k)) / (2.0 * s.x),
                (value(i, j + 1, k) - value(i, j - 1, k)) / (2.0 * s.y),
                (value(i, j, k + 1) - value(i, j, k - 1)) / (2.0 * s.z)};
    }
};

// Cube corner offsets in the canonical table ordering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// The two corners joined by each of the 12 cube edges.
constexpr int kEdgeCorner[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

} // namespace

TriangleMesh extract_mesh(const OccupancyGrid& grid) {
    const std::size_t occupied = grid.occupied_count();
    if (occupied == 0 || occupied == grid.occupancy.size())
        throw ValidationError("extract_mesh: grid is uniformly " +
                              std::string(occupied == 0 ? "empty" : "occupied") +
                              ", nothing to extract");

    const Lattice lat{grid};
    const int li = grid.nx + 2, lj = grid.ny + 2, lk = grid.nz + 2;

    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    edge_vertex.reserve(1024);

    auto sample_id = [&](int i, int j, int k) {
        return static_cast<std::uint64_t>(i) +
               static_cast<std::uint64_t>(li) *
                   (static_cast<std::uint64_t>(j) + static_cast<std::uint64_t>(lj) * k);
    };

    // Unique vertex per crossed lattice edge; the field is 0/1 so crossings
    // sit exactly at edge midpoints.
    auto vertex_on_edge = [&](int i, int j, int k, int axis) {
        const std::uint64_t key = sample_id(i, j, k) * 3 + axis;
        const auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;

        const int i2 = i + (axis == 0), j2 = j + (axis == 1), k2 = k + (axis == 2);
        const Vec3 pa = lat.position(i, j, k);
        const Vec3 pb = lat.position(i2, j2, k2);
        Vec3 n = (lat.gradient(i, j, k) + lat.gradient(i2, j2, k2)) * -0.5;
        if (n.norm() < 1e-12) {
            // Flat surroundings; point toward the empty endpoint.
            const double va = lat.value(i, j, k);
            n = (va > 0.5 ? pb - pa : pa - pb);
        }
        const int id = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back((pa + pb) * 0.5);
        mesh.normals.push_back(n.normalized());
        edge_vertex.emplace(key, id);
        return id;
    };

    for (int k = 0; k < lk - 1; ++k) {
        for (int j = 0; j < lj - 1; ++j) {
            for (int i = 0; i < li - 1; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c)
                    if (lat.value(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]) < 0.5)
                        cube |= 1 << c;
                if (mc::kEdgeTable[cube] == 0) continue;

                int edge_ids[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
                    const int ca = kEdgeCorner[e][0];
                    const int cb = kEdgeCorner[e][1];
                    // Canonical edge key: the lower corner plus the axis.
                    int ai = i + std::min(kCorner[ca][0], kCorner[cb][0]);
                    int aj = j + std::min(kCorner[ca][1], kCorner[cb][1]);
                    int ak = k + std::min(kCorner[ca][2], kCorner[cb][2]);
                    int axis = kCorner[ca][0] != kCorner[cb][0]   ? 0
                               : kCorner[ca][1] != kCorner[cb][1] ? 1
                                                                  : 2;
                    edge_ids[e] = vertex_on_edge(ai, aj, ak, axis);
                }

                const std::int8_t* tri = mc::kTriTable[cube];
                for (int t = 0; tri[t] != -1; t += 3)
                    mesh.triangles.push_back(
                        {edge_ids[tri[t]], edge_ids[tri[t + 1]], edge_ids[tri[t + 2]]});
            }
        }
    }
    return mesh;
}

MaterialTextures assign_uvs_and_materials(TriangleMesh& mesh) {
    if (mesh.vertices.empty())
        throw InvalidInput("assign_uvs_and_materials: empty mesh");

    Vec3 centroid;
    for (const Vec3& v : mesh.vertices) centroid += v;
    centroid = centroid / static_cast<double>(mesh.vertices.size());

    mesh.uvs.clear();
    mesh.uvs.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) {
        const Vec3 d = v - centroid;
        const double r = d.norm();
        if (r < 1e-15) {
            mesh.uvs.push_back({0.5, 0.5});
            continue;
        }
        const double u = (std::atan2(d.z, d.x) + M_PI) / (2.0 * M_PI);
        const double w = std::acos(std::clamp(d.y / r, -1.0, 1.0)) / M_PI;
        mesh.uvs.push_back({std::clamp(u, 0.0, 1.0), std::clamp(w, 0.0, 1.0)});
    }

    MaterialTextures tex;
    tex.kd = Image(256, 256, 3, 128);
    tex.ks = Image(256, 256, 3);
    tex.n = Image(256, 256, 3);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            tex.ks.at(x, y, 0) = 0;    // occlusion slot, unused
            tex.ks.at(x, y, 1) = 204;  // roughness 0.8
            tex.ks.at(x, y, 2) = 0;    // metalness 0.0
            tex.n.at(x, y, 0) = 128;
            tex.n.at(x, y, 1) = 128;
            tex.n.at(x, y, 2) = 255;
        }
    }
    return tex;
}

std::string mesh_to_obj(const TriangleMesh& mesh, const std::string& mtl_name) {
    if (mesh.uvs.size() != mesh.vertices.size() ||
        mesh.normals.size() != mesh.vertices.size())
        throw ValidationError("mesh_to_obj: mesh is missing per-vertex uvs or normals");

    std::string out;
    out.reserve(mesh.vertices.size() * 96 + mesh.triangles.size() * 48);
    out += "mtllib " + mtl_name + "\n";
    char line[160];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(line, sizeof(line), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out += line;
    }
    for (const auto& uv : mesh.uvs) {
        std::snprintf(line, sizeof(line), "vt %.9g %.9g\n", uv[0], uv[1]);
        out += line;
    }
    for (const Vec3& n : mesh.normals) {
        std::snprintf(line, sizeof(line), "vn %.9g %.9g %.9g\n", n.x, n.y, n.z);
        out += line;
    }
    out += "usemtl material0\n";
    for (const auto& t : mesh.triangles) {
        std::snprintf(line, sizeof(line), "f %d/%d/%d %d/%d/%d %d/%d/%d\n", t[0] + 1,
                      t[0] + 1, t[0] + 1, t[1] + 1, t[1] + 1, t[1] + 1, t[2] + 1,
                      t[2] + 1, t[2] + 1);
        out += line;
    }
    return out;
}

std::string material_to_mtl() {
    return "newmtl material0\n"
           "Kd 0.50 0.50 0.50\n"
           "Ks 0.00 0.00 0.00\n"
           "map_Kd texture_kd.png\n"
           "map_Ks texture_ks.png\n"
           "map_Bump texture_n.png\n";
}

ArtifactManifest export_artifacts(const TriangleMesh& mesh, const MaterialTextures& textures,
                                  const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("export_artifacts: cannot create " + out_dir.string());

    ArtifactManifest man;
    man.mesh_obj = out_dir / "mesh.obj";
    man.mesh_mtl = out_dir / "mesh.mtl";
    man.texture_kd = out_dir / "texture_kd.png";
    man.texture_ks = out_dir / "texture_ks.png";
    man.texture_n = out_dir / "texture_n.png";

    auto write_text = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("export_artifacts: cannot open " + p.string());
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!f) throw IoError("export_artifacts: write failed for " + p.string());
    };
    write_text(man.mesh_obj, mesh_to_obj(mesh, "mesh.mtl"));
    write_text(man.mesh_mtl, material_to_mtl());
    png_write_file(textures.kd, man.texture_kd);
    png_write_file(textures.ks, man.texture_ks);
    png_write_file(textures.n, man.texture_n);
    return man;
}

ReconstructionResult reconstruct_dataset(const DatasetArchive& archive, int resolution,
                                         double grid_min, double grid_max) {
    archive.validate();
    if (!archive.manifest.preprocessed)
        throw ValidationError("reconstruct: input archive is not preprocessed");

    std::vector<CarveView> views;
    views.reserve(archive.poses.size());
    for (std::size_t i = 0; i < archive.poses.size(); ++i) {
        const ParsedPoseRow row = parse_pose_row(archive.poses.rows[i]);
        CarveView v;
        // Rows carry the recorder-convention rotation; undo the fix to
        // recover the camera-to-world pose used for projection.
        v.pose = {rotational_fix_inverse(row.view.rotation), row.view.translation};
        v.intrinsics = row.intrinsics;
        v.mask = archive.masks[i];
        views.push_back(std::move(v));
    }

    ReconstructionResult out;
    out.grid = carve(OccupancyGrid(resolution, resolution, resolution,
                                   {grid_min, grid_min, grid_min},
                                   {grid_max, grid_max, grid_max}),
                     views);
    out.mesh = extract_mesh(out.grid);
    out.textures = assign_uvs_and_materials(out.mesh);
    return out;
}

MeshTopology analyze_topology(const TriangleMesh& mesh) {
    MeshTopology topo;
    topo.vertex_count = mesh.vertices.size();
    topo.face_count = mesh.triangles.size();

    std::map<std::pair<int, int>, int> edge_incidence;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[e], b = t[(e + 1) % 3];
            ++edge_incidence[{std::min(a, b), std::max(a, b)}];
        }
    }
    topo.edge_count = edge_incidence.size();
    topo.watertight = !mesh.triangles.empty();
    for (const auto& [edge, count] : edge_incidence)
        if (count != 2) topo.watertight = false;
    topo.euler_characteristic = static_cast<long long>(topo.vertex_count) -
                                static_cast<long long>(topo.edge_count) +
                                static_cast<long long>(topo.face_count);
    return topo;
}

double mesh_signed_volume(const TriangleMesh& mesh) {
    double v = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        v += a.dot(b.cross(c)) / 6.0;
    }
    return v;
}

} // namespace recon
