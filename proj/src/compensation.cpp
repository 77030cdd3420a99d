#include "recon/compensation.hpp"

namespace recon {

RigidTransform anchor_delta(const Anchor& a) {
    if (!a.tracking_valid)
        throw InvalidInput("anchor_delta: anchor '" + a.id + "' is not tracking");
    const Quaternion q_target = rotmat_to_quat(a.initial_pose.rotation);
    const Quaternion q_current = rotmat_to_quat(a.current_pose.rotation);
    const Mat3 r_delta = quat_to_rotmat(quat_delta(q_target, q_current));
    const Vec3 t_delta = a.initial_pose.translation - r_delta * a.current_pose.translation;
    return {r_delta, t_delta};
}

MeanDeltaResult mean_delta(std::span<const RigidTransform> deltas) {
    if (deltas.empty()) return {RigidTransform::identity(), 0};

    Quaternion sum{0, 0, 0, 0};
    Vec3 t_sum;
    Quaternion first = rotmat_to_quat(deltas.front().rotation);
    for (const RigidTransform& d : deltas) {
        Quaternion q = rotmat_to_quat(d.rotation);
        // Hemisphere alignment: q and -q are the same rotation; averaging
        // needs all samples on the side of the first one.
        const double dot = q.a * first.a + q.b * first.b + q.c * first.c + q.d * first.d;
        if (dot < 0.0) q = {-q.a, -q.b, -q.c, -q.d};
        sum = {sum.a + q.a, sum.b + q.b, sum.c + q.c, sum.d + q.d};
        t_sum += d.translation;
    }
    const double n = static_cast<double>(deltas.size());
    const Quaternion mean_q = Quaternion{sum.a / n, sum.b / n, sum.c / n, sum.d / n}.normalized();
    return {{quat_to_rotmat(mean_q), t_sum / n}, static_cast<int>(deltas.size())};
}

RigidTransform compensate_frame(const RigidTransform& camera_pose,
                                const RigidTransform& mean) {
    return mean * camera_pose;
}

const Anchor& RecordingSession::register_anchor(const std::string& id,
                                                const RigidTransform& pose) {
    const auto [it, inserted] = anchors_.insert({id, Anchor{id, pose, pose, true}});
    if (!inserted)
        throw ConflictError("register_anchor: id '" + id + "' already registered");
    return it->second;
}

void RecordingSession::update_anchor(const std::string& id, const RigidTransform& pose,
                                     bool tracking_valid) {
    const auto it = anchors_.find(id);
    if (it == anchors_.end())
        throw NotFoundError("update_anchor: unknown anchor '" + id + "'");
    it->second.current_pose = pose;
    it->second.tracking_valid = tracking_valid;
}

void RecordingSession::record_frame(const RigidTransform& camera_pose,
                                    const SceneBounds& bounds) {
    std::vector<RigidTransform> deltas;
    deltas.reserve(anchors_.size());
    for (const auto& [id, anchor] : anchors_)
        if (anchor.tracking_valid) deltas.push_back(anchor_delta(anchor));

    const MeanDeltaResult mean = mean_delta(deltas);
    CompensationRecord rec{mean.delta, static_cast<int>(frames_.size()), mean.anchor_count};
    frames_.push_back({camera_pose, bounds, rec});
}

RigidTransform RecordingSession::compensated_pose(std::size_t frame) const {
    const Frame& f = frames_.at(frame);
    return compensate_frame(f.camera_pose, f.record.mean_delta);
}

FinalizedTables RecordingSession::finalize_rows() const {
    if (frames_.empty())
        throw ValidationError("finalize_rows: session has no recorded frames");

    FinalizedTables out;
    out.poses.rows.reserve(frames_.size());
    out.compensation.rows.reserve(frames_.size());

    for (std::size_t i = 0; i < frames_.size(); ++i) {
        const Frame& f = frames_[i];
        const RigidTransform comp = compensate_frame(f.camera_pose, f.record.mean_delta);
        const ViewMatrix3x4 view = truncate_view_matrix(comp.to_homogeneous());
        out.poses.rows.push_back(build_pose_row(
            {rotational_fix(view.rotation), view.translation}, intrinsics_, f.bounds));

        // The delta is a diagnostic record, stored without the rotational
        // fix; m and M carry no meaning for it and are written as zero.
        PoseRow17 crow{};
        const RigidTransform& d = f.record.mean_delta;
        const double hwf[3] = {intrinsics_.height, intrinsics_.width, intrinsics_.focal};
        const double t[3] = {d.translation.x, d.translation.y, d.translation.z};
        for (int r = 0; r < 3; ++r) {
            crow[r * 5 + 0] = d.rotation(r, 0);
            crow[r * 5 + 1] = d.rotation(r, 1);
            crow[r * 5 + 2] = d.rotation(r, 2);
            crow[r * 5 + 3] = t[r];
            crow[r * 5 + 4] = hwf[r];
        }
        crow[15] = 0.0;
        crow[16] = 0.0;
        out.compensation.rows.push_back(crow);
    }
    return out;
}

} // namespace recon
