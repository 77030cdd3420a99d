#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "recon/npy.hpp"
#include "recon/pose.hpp"

namespace recon {

/// A tracked reference object fixed to the world. Its reported pose drifts
/// together with the tracking frame, which is what exposes camera jumps.
struct Anchor {
    std::string id;
    RigidTransform initial_pose;   // set once at placement
    RigidTransform current_pose;   // updated every frame
    bool tracking_valid = true;
};

/// Per-frame corrective transform and how many anchors voted for it.
struct CompensationRecord {
    RigidTransform mean_delta;
    int frame_index = 0;
    int anchor_count = 0;          // 0 => frame passed through uncompensated
};

struct MeanDeltaResult {
    RigidTransform delta;
    int anchor_count = 0;
};

struct FinalizedTables {
    PoseBoundsTable poses;          // compensated, rotational fix applied
    PoseBoundsTable compensation;   // raw mean deltas, h/w/f copied, m=M=0
};

/// Delta mapping the anchor's current pose back to its initial pose:
/// rotation via q_delta = q_initial * q_current^-1, translation
/// t = t_initial - R_delta * t_current, so that delta ∘ current == initial.
/// The anchor must currently be tracking.
RigidTransform anchor_delta(const Anchor& a);

/// Hemisphere-aligned component mean of the delta rotations (as
/// quaternions, renormalized) and arithmetic mean of the translations.
/// An empty list yields the identity with anchor_count == 0.
MeanDeltaResult mean_delta(std::span<const RigidTransform> deltas);

/// Pose composition: the mean delta acts as a world-frame (left) factor.
RigidTransform compensate_frame(const RigidTransform& camera_pose,
                                const RigidTransform& mean);

/// Single-writer recording session: anchors and frames are fed from one
/// thread; finalize_rows may run elsewhere once recording has ended.
class RecordingSession {
public:
    explicit RecordingSession(const CameraIntrinsics& intrinsics)
        : intrinsics_(intrinsics) {}

    /// Registers a new anchor; the id must be unused.
    const Anchor& register_anchor(const std::string& id, const RigidTransform& pose);

    /// Per-frame anchor observation. Unknown ids are an error; marking an
    /// anchor invalid excludes it from compensation until it recovers.
    void update_anchor(const std::string& id, const RigidTransform& pose,
                       bool tracking_valid = true);

    /// Records one camera frame; the compensation record is computed here,
    /// from the anchors as currently observed.
    void record_frame(const RigidTransform& camera_pose, const SceneBounds& bounds);

    std::size_t frame_count() const { return frames_.size(); }
    const CompensationRecord& record(std::size_t frame) const {
        return frames_.at(frame).record;
    }
    const CameraIntrinsics& intrinsics() const { return intrinsics_; }

    /// Compensated camera pose of a recorded frame (before the rotational fix).
    RigidTransform compensated_pose(std::size_t frame) const;

    /// Per frame: compensate, truncate to 3x4, apply the rotational fix,
    /// build the 17-element row. Also returns the N x 17 compensation table.
    FinalizedTables finalize_rows() const;

private:
    CameraIntrinsics intrinsics_;
    std::map<std::string, Anchor> anchors_;
    struct Frame {
        RigidTransform camera_pose;
        SceneBounds bounds;
        CompensationRecord record;
    };
    std::vector<Frame> frames_;
};

} // namespace recon
