// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/geometry.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace mg
{

auto Pose::inverse() const -> Pose
{
    const Mat3 rt = rotation.transpose();
    return { rt, -(rt * translation) };
}

auto Pose::operator*(const Pose& rhs) const -> Pose
{
    return { rotation * rhs.rotation, rotation * rhs.translation + translation };
}

auto is_proper_rotation(const Mat3& r, double tol) -> bool
{
    const Mat3 defect = r.transpose() * r - Mat3::Identity();
    return defect.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

auto rotation_about_axis(const Vec3& axis, double angle) -> Mat3
{
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw InvalidArgument("rotation_about_axis: axis must have unit norm");

    Mat3 k;
    k << 0.0, -axis.z(), axis.y(), //
        axis.z(), 0.0, -axis.x(),  //
        -axis.y(), axis.x(), 0.0;
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

auto rot_x(double angle) -> Mat3
{
    const auto c = std::cos(angle);
    const auto s = std::sin(angle);
    Mat3 r;
    r << 1.0, 0.0, 0.0, //
        0.0, c, -s,     //
        0.0, s, c;
    return r;
}

auto rot_y(double angle) -> Mat3
{
    const auto c = std::cos(angle);
    const auto s = std::sin(angle);
    Mat3 r;
    r << c, 0.0, s, //
        0.0, 1.0, 0.0, //
        -s, 0.0, c;
    return r;
}

auto geodesic_angle(const Mat3& a, const Mat3& b) -> double
{
    // Trace formula for the cosine, skew part for the sine. atan2 keeps full
    // precision at both ends of [0, pi] where a bare arccos loses half the
    // significant digits.
    const Mat3 rel = a.transpose() * b;
    const auto cosine = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Vec3 skew { rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1) };
    const auto sine = 0.5 * skew.norm();
    return std::atan2(sine, cosine);
}

auto Box3D::make(const Vec3& center, const Vec3& half_extents, const Mat3& rotation) -> Box3D
{
    if (!(half_extents.array() > 0.0).all() || !half_extents.allFinite())
        throw InvalidArgument("Box3D: half extents must be strictly positive");
    if (!is_proper_rotation(rotation))
        throw InvalidArgument("Box3D: rotation must be a proper rotation");
    return { center, half_extents, rotation };
}

auto Box3D::is_axis_aligned(double tol) const -> bool
{
    return (rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

auto Box3D::min_corner() const -> Vec3
{
    return world_aabb().center - world_aabb().half_extents;
}

auto Box3D::max_corner() const -> Vec3
{
    return world_aabb().center + world_aabb().half_extents;
}

auto Box3D::contains(const Vec3& p, double tol) const -> bool
{
    const Vec3 local = rotation.transpose() * (p - center);
    return (local.cwiseAbs().array() <= (half_extents.array() + tol)).all();
}

auto Box3D::world_aabb() const -> Box3D
{
    if (is_axis_aligned())
        return { center, half_extents, Mat3::Identity() };
    const Vec3 extent = rotation.cwiseAbs() * half_extents;
    return { center, extent, Mat3::Identity() };
}

auto box_diagonal(const Box3D& b) -> double
{
    return 2.0 * b.half_extents.norm();
}

auto iou3d_aabb(const Box3D& a, const Box3D& b) -> double
{
    if (!a.is_axis_aligned() || !b.is_axis_aligned())
        throw InvalidArgument("iou3d_aabb: boxes must be axis-aligned");

    const Vec3 lo = (a.center - a.half_extents).cwiseMax(b.center - b.half_extents);
    const Vec3 hi = (a.center + a.half_extents).cwiseMin(b.center + b.half_extents);
    const Vec3 overlap = (hi - lo).cwiseMax(0.0);
    const auto inter = overlap.prod();
    const auto uni = a.volume() + b.volume() - inter;
    if (uni <= 0.0)
        return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

auto aabb_of_points(std::span<const Vec3> points) -> Box3D
{
    if (points.empty())
        throw EmptyInput("aabb_of_points: empty point set");

    Vec3 lo = points.front();
    Vec3 hi = points.front();
    for (const auto& p: points)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec3 half = (0.5 * (hi - lo)).cwiseMax(kMinHalfExtent);
    return { 0.5 * (lo + hi), half, Mat3::Identity() };
}

} // namespace mg
