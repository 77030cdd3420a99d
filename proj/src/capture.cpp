#include "recon/capture.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "recon/compensation.hpp"
#include "recon/rng.hpp"
#include "recon/zip.hpp"

namespace recon {

namespace {

constexpr double kAmbient = 0.25;  // keeps grazing foreground pixels off-black

std::optional<RayHit> intersect_sphere(const SphereShape& s, const Vec3& o, const Vec3& d) {
    const Vec3 oc = o - s.center;
    const double b = oc.dot(d);
    const double c = oc.dot(oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t <= 1e-12) t = -b + sq;
    if (t <= 1e-12) return std::nullopt;
    const Vec3 hit = o + d * t;
    return RayHit{t, (hit - s.center) / s.radius};
}

std::optional<RayHit> intersect_box(const BoxShape& box, const Vec3& o, const Vec3& d) {
    const Vec3 lo = box.center - box.half_extents;
    const Vec3 hi = box.center + box.half_extents;
    double tmin = -1e300, tmax = 1e300;
    int axis_min = -1;
    const double ov[3] = {o.x, o.y, o.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double lov[3] = {lo.x, lo.y, lo.z};
    const double hiv[3] = {hi.x, hi.y, hi.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(dv[i]) < 1e-300) {
            if (ov[i] < lov[i] || ov[i] > hiv[i]) return std::nullopt;
            continue;
        }
        double t0 = (lov[i] - ov[i]) / dv[i];
        double t1 = (hiv[i] - ov[i]) / dv[i];
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > tmin) {
            tmin = t0;
            axis_min = i;
        }
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmax <= 1e-12) return std::nullopt;
    const double t = tmin > 1e-12 ? tmin : tmax;
    Vec3 n{0, 0, 0};
    if (axis_min >= 0) {
        double* comp = axis_min == 0 ? &n.x : axis_min == 1 ? &n.y : &n.z;
        *comp = dv[axis_min] > 0.0 ? -1.0 : 1.0;
    } else {
        n = {0, 0, 1};
    }
    return RayHit{t, n};
}

Vec3 shape_center(const SceneShape& shape) {
    if (const auto* s = std::get_if<SphereShape>(&shape)) return s->center;
    return std::get<BoxShape>(shape).center;
}

double shape_bounding_radius(const SceneShape& shape) {
    if (const auto* s = std::get_if<SphereShape>(&shape)) return s->radius;
    return std::get<BoxShape>(shape).half_extents.norm();
}

// Small random rigid perturbation: rotation of |angle| ~ N(0, sigma) about a
// random axis and translation ~ N(0, sigma) per component.
RigidTransform random_perturbation(Rng& rng, double sigma) {
    const Vec3 axis = rng.unit_vector();
    const double angle = rng.normal(0.0, sigma);
    const Mat3 r = quat_to_rotmat(Quaternion::from_axis_angle(axis, angle));
    const Vec3 t{rng.normal(0.0, sigma), rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
    return {r, t};
}

} // namespace

std::optional<RayHit> intersect_shape(const SceneShape& shape, const Vec3& origin,
                                      const Vec3& dir) {
    if (const auto* s = std::get_if<SphereShape>(&shape))
        return intersect_sphere(*s, origin, dir);
    return intersect_box(std::get<BoxShape>(shape), origin, dir);
}

Vec3 pixel_ray_direction(const RigidTransform& pose, const CameraIntrinsics& k,
                         double px, double py) {
    const double u = px + 0.5;
    const double v = py + 0.5;
    const Vec3 cam_dir{(u - k.width / 2.0) / k.focal, -(v - k.height / 2.0) / k.focal, -1.0};
    return (pose.rotation * cam_dir).normalized();
}

std::vector<RigidTransform> generate_orbit(int n, double radius, double height,
                                           const Vec3& target) {
    if (n < 2) throw InvalidInput("generate_orbit: need at least 2 frames");
    if (!(radius > 0.0)) throw InvalidInput("generate_orbit: radius must be positive");

    std::vector<RigidTransform> track;
    track.reserve(n);
    const Vec3 up{0, 1, 0};
    for (int i = 0; i < n; ++i) {
        const double theta = 2.0 * M_PI * i / n;
        const Vec3 pos = target + Vec3{radius * std::cos(theta), height,
                                       radius * std::sin(theta)};
        const Vec3 offset = pos - target;
        if (offset.norm() < 1e-12)
            throw DegenerateInput("generate_orbit: camera coincides with target");

        const Vec3 z_cam = offset.normalized();  // camera looks along -z
        const Vec3 x_cam = up.cross(z_cam).normalized();
        const Vec3 y_cam = z_cam.cross(x_cam);
        Mat3 r;
        r.set_col(0, x_cam);
        r.set_col(1, y_cam);
        r.set_col(2, z_cam);
        track.push_back({r, pos});
    }
    return track;
}

RenderResult render_views(const std::vector<RigidTransform>& track,
                          const SceneShape& shape, const CameraIntrinsics& k) {
    const int w = static_cast<int>(k.width);
    const int h = static_cast<int>(k.height);
    const Vec3 center = shape_center(shape);
    const double rad = shape_bounding_radius(shape);

    RenderResult out;
    out.images.reserve(track.size());
    out.silhouettes.reserve(track.size());

    for (std::size_t fi = 0; fi < track.size(); ++fi) {
        const RigidTransform& pose = track[fi];
        // Entirely in front of the camera: the whole bounding sphere must
        // have negative camera-space z.
        const Vec3 center_cam = pose.rotation.transposed() * (center - pose.translation);
        if (center_cam.z + rad >= 0.0)
            throw VisibilityError("render_views: shape behind camera at frame " +
                                  std::to_string(fi));

        Image img(w, h, 3);
        Image sil(w, h, 1);
        bool any_hit = false;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec3 dir = pixel_ray_direction(pose, k, x, y);
                const std::optional<RayHit> hit = intersect_shape(shape, pose.translation, dir);
                if (!hit) continue;
                any_hit = true;
                sil.at(x, y) = 255;
                const double lambert = std::max(0.0, hit->normal.dot(-dir));
                const double shade = kAmbient + (1.0 - kAmbient) * lambert;
                const auto g = static_cast<std::uint8_t>(std::lround(shade * 255.0));
                img.at(x, y, 0) = g;
                img.at(x, y, 1) = g;
                img.at(x, y, 2) = g;
            }
        }
        if (!any_hit) out.empty_frames.push_back(static_cast<int>(fi));
        out.images.push_back(std::move(img));
        out.silhouettes.push_back(std::move(sil));
    }
    return out;
}

SceneBounds compute_bounds(const RigidTransform& pose, const SceneShape& shape,
                           const CameraIntrinsics& k) {
    const int w = static_cast<int>(k.width);
    const int h = static_cast<int>(k.height);
    double mn = 1e300, mx = 0.0;
    bool any = false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec3 dir = pixel_ray_direction(pose, k, x, y);
            if (const auto hit = intersect_shape(shape, pose.translation, dir)) {
                any = true;
                mn = std::min(mn, hit->distance);
                mx = std::max(mx, hit->distance);
            }
        }
    }
    if (!any) throw VisibilityError("compute_bounds: shape not visible from pose");
    return SceneBounds(mn, mx);
}

DriftedObservations inject_drift(const std::vector<RigidTransform>& track,
                                 const std::vector<AnchorObservation>& anchors,
                                 const std::vector<DriftEvent>& events,
                                 double noise_sigma, std::uint64_t noise_seed) {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].frame <= events[i - 1].frame)
            throw InvalidInput("inject_drift: event frames must be strictly increasing");

    DriftedObservations out;
    out.reported_track.reserve(track.size());
    out.anchors = anchors;
    for (AnchorObservation& a : out.anchors) {
        a.reported.clear();
        a.reported.reserve(track.size());
    }

    Rng rng(noise_seed);
    RigidTransform cumulative = RigidTransform::identity();
    std::size_t next_event = 0;
    for (std::size_t t = 0; t < track.size(); ++t) {
        while (next_event < events.size() &&
               events[next_event].frame <= static_cast<int>(t)) {
            cumulative = events[next_event].jump * cumulative;
            ++next_event;
        }
        out.reported_track.push_back(cumulative * track[t]);
        for (AnchorObservation& a : out.anchors) {
            RigidTransform observed = cumulative * a.initial_pose;
            if (noise_sigma > 0.0)
                observed = observed * random_perturbation(rng, noise_sigma);
            a.reported.push_back(observed);
        }
    }
    return out;
}

CaptureSession capture_session(const CaptureConfig& config) {
    CaptureSession s;
    s.intrinsics = config.intrinsics;
    s.true_track = generate_orbit(config.frames, config.orbit_radius,
                                  config.orbit_height, config.target);

    RenderResult rendered = render_views(s.true_track, config.shape, config.intrinsics);
    s.images = std::move(rendered.images);
    s.silhouettes = std::move(rendered.silhouettes);

    s.bounds.reserve(s.true_track.size());
    for (const RigidTransform& pose : s.true_track)
        s.bounds.push_back(compute_bounds(pose, config.shape, config.intrinsics));

    // Anchors sit on a ring around the scene, oriented toward it. The seed
    // only randomizes their phase so sessions differ across seeds.
    std::vector<AnchorObservation> anchors;
    Rng rng(config.seed);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const Vec3 center = shape_center(config.shape);
    for (int i = 0; i < config.anchor_count; ++i) {
        const double theta = phase + 2.0 * M_PI * i / std::max(config.anchor_count, 1);
        const Vec3 pos = center + Vec3{config.anchor_ring_radius * std::cos(theta),
                                       0.05 * i,
                                       config.anchor_ring_radius * std::sin(theta)};
        const Mat3 r = quat_to_rotmat(Quaternion::from_axis_angle({0, 1, 0}, -theta));
        anchors.push_back({"anchor-" + std::to_string(i), {r, pos}, {}});
    }

    DriftedObservations obs = inject_drift(s.true_track, anchors, config.drift,
                                           config.anchor_noise_sigma, config.seed ^ 0x9e3779b9u);
    s.reported_track = std::move(obs.reported_track);
    s.anchors = std::move(obs.anchors);
    return s;
}

DatasetArchive export_session(const CaptureSession& session) {
    if (session.reported_track.empty())
        throw ValidationError("export_session: session has no frames");

    RecordingSession rec(session.intrinsics);
    for (const AnchorObservation& a : session.anchors)
        rec.register_anchor(a.id, a.initial_pose);

    for (std::size_t t = 0; t < session.reported_track.size(); ++t) {
        for (const AnchorObservation& a : session.anchors)
            rec.update_anchor(a.id, a.reported[t]);
        rec.record_frame(session.reported_track[t], session.bounds[t]);
    }
    const FinalizedTables tables = rec.finalize_rows();

    DatasetArchive archive;
    archive.manifest.frames = static_cast<int>(session.reported_track.size());
    archive.manifest.height = session.intrinsics.height;
    archive.manifest.width = session.intrinsics.width;
    archive.manifest.focal = session.intrinsics.focal;
    archive.manifest.preprocessed = false;
    archive.poses = tables.poses;
    archive.compensation = tables.compensation;
    archive.images = session.images;
    archive.validate();
    return archive;
}

namespace {

nlohmann::json pose_to_json(const RigidTransform& p) {
    nlohmann::json j = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) j.push_back(p.rotation(r, c));
    j.push_back(p.translation.x);
    j.push_back(p.translation.y);
    j.push_back(p.translation.z);
    return j;
}

RigidTransform pose_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 12)
        throw FormatError("raw session: pose entry is not a 12-element array");
    RigidTransform p;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) p.rotation(r, c) = j[r * 3 + c].get<double>();
    p.translation = {j[9].get<double>(), j[10].get<double>(), j[11].get<double>()};
    return p;
}

} // namespace

std::vector<std::uint8_t> pack_raw_session(const CaptureSession& session) {
    nlohmann::json j;
    j["intrinsics"] = {{"height", session.intrinsics.height},
                       {"width", session.intrinsics.width},
                       {"focal", session.intrinsics.focal}};
    j["reported_track"] = nlohmann::json::array();
    for (const RigidTransform& p : session.reported_track)
        j["reported_track"].push_back(pose_to_json(p));
    // Simulator ground truth rides along for diagnostics; consumers of the
    // raw session must not rely on it.
    j["true_track"] = nlohmann::json::array();
    for (const RigidTransform& p : session.true_track)
        j["true_track"].push_back(pose_to_json(p));
    j["bounds"] = nlohmann::json::array();
    for (const SceneBounds& b : session.bounds)
        j["bounds"].push_back({b.min_dist, b.max_dist});
    j["anchors"] = nlohmann::json::array();
    for (const AnchorObservation& a : session.anchors) {
        nlohmann::json ja;
        ja["id"] = a.id;
        ja["initial"] = pose_to_json(a.initial_pose);
        ja["reported"] = nlohmann::json::array();
        for (const RigidTransform& p : a.reported) ja["reported"].push_back(pose_to_json(p));
        j["anchors"].push_back(ja);
    }

    std::vector<ZipEntry> entries;
    const std::string text = j.dump(2);
    entries.push_back({"session.json", {text.begin(), text.end()}});
    for (std::size_t i = 0; i < session.images.size(); ++i)
        entries.push_back({"images/" + frame_name(static_cast<int>(i)) + ".png",
                           png_encode(session.images[i])});
    return zip_pack(entries);
}

CaptureSession unpack_raw_session(const std::vector<std::uint8_t>& bytes) {
    const std::vector<ZipEntry> entries = zip_unpack(bytes);
    const ZipEntry* json_entry = nullptr;
    std::vector<const ZipEntry*> image_entries;
    for (const ZipEntry& e : entries) {
        if (e.name == "session.json") json_entry = &e;
        else if (e.name.starts_with("images/")) image_entries.push_back(&e);
    }
    if (!json_entry) throw ValidationError("raw session: missing session.json");

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_entry->data.begin(), json_entry->data.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("raw session: bad json: ") + e.what());
    }

    CaptureSession s;
    s.intrinsics = CameraIntrinsics(j.at("intrinsics").at("height").get<double>(),
                                    j.at("intrinsics").at("width").get<double>(),
                                    j.at("intrinsics").at("focal").get<double>());
    for (const auto& p : j.at("reported_track")) s.reported_track.push_back(pose_from_json(p));
    if (j.contains("true_track"))
        for (const auto& p : j.at("true_track")) s.true_track.push_back(pose_from_json(p));
    for (const auto& b : j.at("bounds"))
        s.bounds.push_back(SceneBounds(b.at(0).get<double>(), b.at(1).get<double>()));
    for (const auto& ja : j.at("anchors")) {
        AnchorObservation a;
        a.id = ja.at("id").get<std::string>();
        a.initial_pose = pose_from_json(ja.at("initial"));
        for (const auto& p : ja.at("reported")) a.reported.push_back(pose_from_json(p));
        s.anchors.push_back(std::move(a));
    }

    std::sort(image_entries.begin(), image_entries.end(),
              [](const ZipEntry* a, const ZipEntry* b) { return a->name < b->name; });
    for (const ZipEntry* e : image_entries) s.images.push_back(png_decode(e->data));

    if (s.reported_track.size() != s.images.size() ||
        s.reported_track.size() != s.bounds.size())
        throw ValidationError("raw session: frame counts disagree across members");
    for (const AnchorObservation& a : s.anchors)
        if (a.reported.size() != s.reported_track.size())
            throw ValidationError("raw session: anchor track length mismatch for " + a.id);
    return s;
}

} // namespace recon
