#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "recon/dataset.hpp"
#include "recon/image.hpp"
#include "recon/pose.hpp"

namespace recon {

struct SphereShape {
    Vec3 center;
    double radius = 0.0;
};

struct BoxShape {
    Vec3 center;
    Vec3 half_extents;
};

using SceneShape = std::variant<SphereShape, BoxShape>;

/// A tracking-frame jump: from frame `frame` onward the reported poses are
/// the true ones left-composed with `jump`.
struct DriftEvent {
    int frame = 0;
    RigidTransform jump;
};

struct RayHit {
    double distance = 0.0;  // along the unit-length ray direction
    Vec3 normal;
};

/// First positive-distance intersection of a world-space ray with the shape.
std::optional<RayHit> intersect_shape(const SceneShape& shape, const Vec3& origin,
                                      const Vec3& dir);

/// Shared pinhole convention (camera looks along -z):
///   u = w/2 + f * x_c / (-z_c),  v = h/2 - f * y_c / (-z_c).
/// Unit-length world direction of the ray through pixel center (px+0.5, py+0.5).
Vec3 pixel_ray_direction(const RigidTransform& pose, const CameraIntrinsics& k,
                         double px, double py);

/// n camera-to-world poses evenly spaced on a circle of the given radius at
/// the given height about `target`, each looking at `target` with -z forward
/// and +y-projected up.
std::vector<RigidTransform> generate_orbit(int n, double radius, double height,
                                           const Vec3& target);

struct RenderResult {
    std::vector<Image> images;       // Lambertian gray over black, RGB
    std::vector<Image> silhouettes;  // binary 0/255, single channel
    std::vector<int> empty_frames;   // frames whose silhouette has no hits
};

/// Ray-cast every pixel of every view. The shape must be entirely in front
/// of each camera; a shape merely outside the frustum yields an empty
/// silhouette plus a warning entry instead.
RenderResult render_views(const std::vector<RigidTransform>& track,
                          const SceneShape& shape, const CameraIntrinsics& k);

/// Min/max hit distance over the silhouette pixels of one view.
SceneBounds compute_bounds(const RigidTransform& pose, const SceneShape& shape,
                           const CameraIntrinsics& k);

struct AnchorObservation {
    std::string id;
    RigidTransform initial_pose;             // pre-drift placement
    std::vector<RigidTransform> reported;    // per frame, drift (and noise) applied
};

struct DriftedObservations {
    std::vector<RigidTransform> reported_track;
    std::vector<AnchorObservation> anchors;
};

/// Applies the cumulative jump J_t (composition of all events with
/// frame <= t, later events composing on the left) to camera and anchor
/// poses. `noise_sigma` > 0 perturbs anchor observations (meters / radians).
DriftedObservations inject_drift(const std::vector<RigidTransform>& track,
                                 const std::vector<AnchorObservation>& anchors,
                                 const std::vector<DriftEvent>& events,
                                 double noise_sigma = 0.0,
                                 std::uint64_t noise_seed = 0);

struct CaptureConfig {
    int frames = 8;
    double orbit_radius = 2.0;
    double orbit_height = 0.0;
    Vec3 target;
    CameraIntrinsics intrinsics{512, 512, 300};
    SceneShape shape = SphereShape{{0, 0, 0}, 0.35};
    std::vector<DriftEvent> drift;
    int anchor_count = 4;
    double anchor_ring_radius = 1.0;
    double anchor_noise_sigma = 0.0;
    std::uint64_t seed = 1;
};

/// Everything the simulated recorder observed plus the ground truth that a
/// real device would not have.
struct CaptureSession {
    CameraIntrinsics intrinsics{512, 512, 300};
    std::vector<RigidTransform> true_track;
    std::vector<RigidTransform> reported_track;
    std::vector<AnchorObservation> anchors;
    std::vector<SceneBounds> bounds;
    std::vector<Image> images;
    std::vector<Image> silhouettes;
};

/// Runs the full simulated recording: orbit, renders, bounds, anchor
/// placement, drift injection. Deterministic for a fixed config.
CaptureSession capture_session(const CaptureConfig& config);

/// Replays the reported session through a RecordingSession and packs the
/// compensated dataset archive (images + poses_bounds + compensation).
/// Masks are not included; preprocessing adds them.
DatasetArchive export_session(const CaptureSession& session);

/// Raw-session container for the compensate command: a zip holding
/// session.json (reported poses, anchors, bounds, intrinsics) and images/.
std::vector<std::uint8_t> pack_raw_session(const CaptureSession& session);
CaptureSession unpack_raw_session(const std::vector<std::uint8_t>& bytes);

} // namespace recon
