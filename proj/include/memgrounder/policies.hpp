// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/geometry.hpp>

#include <string_view>
#include <vector>

namespace mg
{

enum class PolicyTag
{
    oss,
    sras_up,
    sras_down,
    sras_horizontal,
    orbit,
};

[[nodiscard]] auto policy_name(PolicyTag tag) -> std::string_view;

/// Ordered poses with sequential labels 0..n-1 (capture order).
struct PoseBatch
{
    PolicyTag tag = PolicyTag::oss;
    std::vector<Pose> poses;
    std::vector<int> labels;

    [[nodiscard]] auto size() const -> std::size_t { return poses.size(); }
};

/// Angles and distances of every sweep. Defaults follow the published
/// recipes; back_off and center_pull are our choice.
struct SweepSettings
{
    int oss_count = 20;
    double oss_step_deg = 18.0;
    double oss_tilt_deg = -20.0;

    std::vector<double> sras_yaws_deg { -90.0, -45.0, 0.0, 45.0, 90.0 };
    std::vector<double> sras_tilts_deg { 0.0, 18.0, 36.0, 54.0 };
    int horizontal_count = 20;
    double horizontal_step_deg = 18.0;
    double horizontal_tilt_deg = -25.0;

    double back_off = 0.5;
    double center_pull = 0.5;

    int orbit_count = 16;
    double orbit_tilt_deg = 30.0;
    double orbit_min_radius = 1.5;
};

/// Removes roll and pitch: local Y becomes world gravity, local X horizontal,
/// position and heading unchanged. A vertical gaze keeps the heading implied
/// by the camera's right axis; world +Z is the last resort.
[[nodiscard]] auto level_pose(const Pose& p) -> Pose;

/// In-place 360 degree sweep: p * Ry(step * i) * Rx(tilt), i = 0..count-1.
[[nodiscard]] auto oss_poses(const Pose& p, const SweepSettings& s = {}) -> PoseBatch;

/// Backed-off fan looking upward: yaw-major, tilt-minor.
[[nodiscard]] auto sras_up_poses(const Pose& anchor, const SweepSettings& s = {}) -> PoseBatch;
/// Same fan with negated tilts.
[[nodiscard]] auto sras_down_poses(const Pose& anchor, const SweepSettings& s = {}) -> PoseBatch;
/// Backed off, pulled towards the room center, then a full tilted sweep.
[[nodiscard]] auto sras_horizontal_poses(const Pose& anchor, const Vec3& room_center, const SweepSettings& s = {})
    -> PoseBatch;

/// Position the backed-off anchor sweeps start from.
[[nodiscard]] auto backed_off(const Pose& anchor, double back_off) -> Vec3;

/// Look-at pose from `eye` towards `target` with local Y as close to gravity
/// as possible. Throws InvalidArgument when eye and target coincide.
[[nodiscard]] auto look_at(const Vec3& eye, const Vec3& target) -> Pose;

/// `count` look-at poses evenly spaced on the ring of the sphere around
/// `center` at `tilt_deg` elevation. Throws InvalidArgument unless radius > 0.
[[nodiscard]] auto orbit_poses(const Vec3& center, double radius, int count = 16, double tilt_deg = 30.0)
    -> PoseBatch;

/// max(diagonal / 2, min_radius).
[[nodiscard]] auto orbit_radius(const Box3D& ref_box, double min_radius = 1.5) -> double;

} // namespace mg
