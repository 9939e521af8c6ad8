// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/policies.hpp>

#include <cmath>

namespace mg
{

auto policy_name(PolicyTag tag) -> std::string_view
{
    switch (tag)
    {
        case PolicyTag::oss: return "oss";
        case PolicyTag::sras_up: return "sras_up";
        case PolicyTag::sras_down: return "sras_down";
        case PolicyTag::sras_horizontal: return "sras_horizontal";
        case PolicyTag::orbit: return "orbit";
    }
    return "unknown";
}

namespace
{
    auto batch(PolicyTag tag, std::vector<Pose> poses) -> PoseBatch
    {
        auto out = PoseBatch { tag, std::move(poses), {} };
        out.labels.resize(out.poses.size());
        for (std::size_t i = 0; i < out.labels.size(); ++i)
            out.labels[i] = static_cast<int>(i);
        return out;
    }

    auto frame_from_axes(const Vec3& x, const Vec3& y, const Vec3& z) -> Mat3
    {
        Mat3 r;
        r.col(0) = x;
        r.col(1) = y;
        r.col(2) = z;
        return r;
    }

    auto sras_fan(PolicyTag tag, const Pose& anchor, const SweepSettings& s, double tilt_sign) -> PoseBatch
    {
        const Vec3 origin = backed_off(anchor, s.back_off);
        auto poses = std::vector<Pose> {};
        for (const auto yaw: s.sras_yaws_deg)
            for (const auto tilt: s.sras_tilts_deg)
                poses.push_back(
                    { anchor.rotation * rot_y(deg2rad(yaw)) * rot_x(deg2rad(tilt_sign * tilt)), origin });
        return batch(tag, std::move(poses));
    }
} // namespace

auto level_pose(const Pose& p) -> Pose
{
    const Vec3 g = world::gravity();
    Vec3 heading = world::horizontal(p.forward());
    if (heading.norm() < 1e-9)
        heading = world::horizontal(p.right().cross(g));
    if (heading.norm() < 1e-9)
        heading = Vec3::UnitZ();
    const Vec3 z = heading.normalized();
    return { frame_from_axes(g.cross(z), g, z), p.translation };
}

auto oss_poses(const Pose& p, const SweepSettings& s) -> PoseBatch
{
    const Mat3 tilt = rot_x(deg2rad(s.oss_tilt_deg));
    auto poses = std::vector<Pose> {};
    for (int i = 0; i < s.oss_count; ++i)
        poses.push_back({ p.rotation * rot_y(deg2rad(s.oss_step_deg * i)) * tilt, p.translation });
    return batch(PolicyTag::oss, std::move(poses));
}

auto backed_off(const Pose& anchor, double back_off) -> Vec3
{
    return anchor.translation - back_off * anchor.forward();
}

auto sras_up_poses(const Pose& anchor, const SweepSettings& s) -> PoseBatch
{
    return sras_fan(PolicyTag::sras_up, anchor, s, 1.0);
}

auto sras_down_poses(const Pose& anchor, const SweepSettings& s) -> PoseBatch
{
    return sras_fan(PolicyTag::sras_down, anchor, s, -1.0);
}

auto sras_horizontal_poses(const Pose& anchor, const Vec3& room_center, const SweepSettings& s) -> PoseBatch
{
    const Vec3 start = backed_off(anchor, s.back_off);
    const Vec3 origin = start + s.center_pull * world::horizontal(room_center - start);
    const Mat3 tilt = rot_x(deg2rad(s.horizontal_tilt_deg));
    auto poses = std::vector<Pose> {};
    for (int i = 0; i < s.horizontal_count; ++i)
        poses.push_back({ anchor.rotation * rot_y(deg2rad(s.horizontal_step_deg * i)) * tilt, origin });
    return batch(PolicyTag::sras_horizontal, std::move(poses));
}

auto look_at(const Vec3& eye, const Vec3& target) -> Pose
{
    const Vec3 d = target - eye;
    if (d.norm() < 1e-12)
        throw InvalidArgument("look_at: eye and target coincide");
    const Vec3 z = d.normalized();
    const Vec3 g = world::gravity();
    Vec3 y = g - g.dot(z) * z;
    // Vertical gaze: keep world +X as the image right axis.
    if (y.norm() < 1e-9)
        return { frame_from_axes(Vec3::UnitX(), z.cross(Vec3::UnitX()), z), eye };
    y.normalize();
    return { frame_from_axes(y.cross(z), y, z), eye };
}

auto orbit_poses(const Vec3& center, double radius, int count, double tilt_deg) -> PoseBatch
{
    if (!(radius > 0.0))
        throw InvalidArgument("orbit_poses: radius must be positive");
    if (count <= 0)
        throw InvalidArgument("orbit_poses: count must be positive");

    const auto tilt = deg2rad(tilt_deg);
    auto poses = std::vector<Pose> {};
    for (int k = 0; k < count; ++k)
    {
        const auto theta = 2.0 * kPi * k / count;
        // Up is -Y, so a positive elevation lowers the y coordinate.
        const Vec3 offset { std::cos(tilt) * std::sin(theta), -std::sin(tilt), std::cos(tilt) * std::cos(theta) };
        poses.push_back(look_at(center + radius * offset, center));
    }
    return batch(PolicyTag::orbit, std::move(poses));
}

auto orbit_radius(const Box3D& ref_box, double min_radius) -> double
{
    return std::max(box_diagonal(ref_box) / 2.0, min_radius);
}

} // namespace mg
