// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <span>

namespace mg
{

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr auto kPi = std::numbers::pi;

constexpr auto deg2rad(double deg) -> double { return deg * kPi / 180.0; }
constexpr auto rad2deg(double rad) -> double { return rad * 180.0 / kPi; }

/// World frame conventions shared by every module. Gravity points along
/// world +Y, so the horizontal plane is X-Z. Cameras follow OpenCV: local X
/// right, local Y down, local Z forward.
namespace world
{
    inline auto gravity() -> Vec3 { return Vec3::UnitY(); }
    inline auto horizontal(const Vec3& v) -> Vec3 { return { v.x(), 0.0, v.z() }; }
} // namespace world

/// Rigid transform, world-from-camera. `translation` is the camera origin in
/// world coordinates.
struct Pose
{
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static auto identity() -> Pose { return {}; }

    [[nodiscard]] auto inverse() const -> Pose;
    [[nodiscard]] auto operator*(const Pose& rhs) const -> Pose;
    [[nodiscard]] auto apply(const Vec3& p) const -> Vec3 { return rotation * p + translation; }

    /// Camera axes expressed in world coordinates.
    [[nodiscard]] auto right() const -> Vec3 { return rotation.col(0); }
    [[nodiscard]] auto down() const -> Vec3 { return rotation.col(1); }
    [[nodiscard]] auto forward() const -> Vec3 { return rotation.col(2); }
};

[[nodiscard]] auto is_proper_rotation(const Mat3& r, double tol = 1e-9) -> bool;

/// Rodrigues rotation. Throws InvalidArgument unless |axis| = 1 within 1e-9.
[[nodiscard]] auto rotation_about_axis(const Vec3& axis, double angle) -> Mat3;

/// Shorthands for rotations about the local camera axes.
[[nodiscard]] auto rot_x(double angle) -> Mat3;
[[nodiscard]] auto rot_y(double angle) -> Mat3;

/// Relative rotation angle in [0, pi].
[[nodiscard]] auto geodesic_angle(const Mat3& a, const Mat3& b) -> double;

struct Box3D
{
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Constant(0.5);
    Mat3 rotation = Mat3::Identity();

    /// Validating constructor: every half extent must be strictly positive.
    static auto make(const Vec3& center, const Vec3& half_extents, const Mat3& rotation = Mat3::Identity())
        -> Box3D;

    [[nodiscard]] auto is_axis_aligned(double tol = 1e-12) const -> bool;
    [[nodiscard]] auto min_corner() const -> Vec3;
    [[nodiscard]] auto max_corner() const -> Vec3;
    [[nodiscard]] auto volume() const -> double { return 8.0 * half_extents.prod(); }
    [[nodiscard]] auto contains(const Vec3& p, double tol = 0.0) const -> bool;
    /// Smallest axis-aligned box enclosing this (possibly oriented) box.
    [[nodiscard]] auto world_aabb() const -> Box3D;
};

[[nodiscard]] auto box_diagonal(const Box3D& b) -> double;

/// Volume IoU of two axis-aligned boxes; rotated input throws InvalidArgument.
[[nodiscard]] auto iou3d_aabb(const Box3D& a, const Box3D& b) -> double;

constexpr auto kMinHalfExtent = 1e-4;

/// Tightest axis-aligned box around the points; degenerate axes are padded to
/// kMinHalfExtent. Throws EmptyInput on an empty span.
[[nodiscard]] auto aabb_of_points(std::span<const Vec3> points) -> Box3D;

} // namespace mg
