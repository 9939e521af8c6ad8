// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/geometry.hpp>

#include "oracles.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include <random>

using namespace mg;

TEST(RotationAboutAxis, ZeroAngleIsIdentity)
{
    EXPECT_TRUE(rotation_about_axis(Vec3::UnitY(), 0.0).isApprox(Mat3::Identity(), 0.0));
}

TEST(RotationAboutAxis, HalfTurnFlipsX)
{
    const Vec3 p = rotation_about_axis(Vec3::UnitY(), kPi) * Vec3::UnitX();
    EXPECT_NEAR(p.x(), -1.0, 1e-15);
    EXPECT_NEAR(p.y(), 0.0, 1e-15);
    EXPECT_NEAR(p.z(), 0.0, 1e-15);
}

TEST(RotationAboutAxis, MatchesRodriguesVectorForm)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i)
    {
        const Vec3 axis = oracle::random_unit(rng);
        const double angle = std::uniform_real_distribution<double>(-4.0, 4.0)(rng);
        const Vec3 v = oracle::random_unit(rng) * 3.0;
        const Vec3 expected = oracle::rodrigues_apply(axis, angle, v);
        EXPECT_LT((rotation_about_axis(axis, angle) * v - expected).norm(), 1e-12);
    }
    const Vec3 q = rotation_about_axis(Vec3::UnitY(), kPi / 2) * Vec3::UnitZ();
    EXPECT_LT((q - oracle::rodrigues_apply(Vec3::UnitY(), kPi / 2, Vec3::UnitZ())).norm(), 1e-12);
}

TEST(RotationAboutAxis, RejectsNonUnitAxis)
{
    EXPECT_THROW((void)rotation_about_axis(Vec3(0, 2, 0), 0.3), InvalidArgument);
    EXPECT_THROW((void)rotation_about_axis(Vec3::Zero(), 0.3), InvalidArgument);
}

TEST(RotationAboutAxis, ProducesProperRotations)
{
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i)
        EXPECT_TRUE(is_proper_rotation(oracle::random_rotation(rng)));
}

TEST(GeodesicAngle, IdentityAndQuarterTurn)
{
    EXPECT_EQ(geodesic_angle(Mat3::Identity(), Mat3::Identity()), 0.0);
    EXPECT_NEAR(geodesic_angle(Mat3::Identity(), rotation_about_axis(Vec3::UnitY(), kPi / 2)), kPi / 2, 1e-15);
}

TEST(GeodesicAngle, LeftInvariantAgainstAxisAngleOracle)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i)
    {
        const Mat3 r = oracle::random_rotation(rng);
        const Vec3 a = oracle::random_unit(rng);
        EXPECT_NEAR(geodesic_angle(r, r * rotation_about_axis(a, 0.3)), 0.3, 1e-9);
    }
}

TEST(GeodesicAngle, SelfDistanceAndSymmetry)
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 500; ++i)
    {
        const Mat3 a = oracle::random_rotation(rng);
        const Mat3 b = oracle::random_rotation(rng);
        EXPECT_NEAR(geodesic_angle(a, a), 0.0, 1e-9);
        EXPECT_NEAR(geodesic_angle(a, b), geodesic_angle(b, a), 1e-12);
        const auto g = geodesic_angle(a, b);
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, kPi);
        EXPECT_NEAR(geodesic_angle(Mat3::Identity(), a), oracle::axis_angle_magnitude(a), 1e-9);
    }
}

TEST(GeodesicAngle, ConjugationInvariant)
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i)
    {
        const Mat3 a = oracle::random_rotation(rng);
        const Mat3 b = oracle::random_rotation(rng);
        const Mat3 q = oracle::random_rotation(rng);
        EXPECT_NEAR(geodesic_angle(q * a * q.transpose(), q * b * q.transpose()), geodesic_angle(a, b), 1e-9);
    }
}

TEST(GeodesicAngle, StableNearHalfTurn)
{
    const Mat3 h = rotation_about_axis(Vec3::UnitX(), kPi);
    EXPECT_NEAR(geodesic_angle(Mat3::Identity(), h), kPi, 1e-12);
    EXPECT_NEAR(geodesic_angle(Mat3::Identity(), rotation_about_axis(Vec3::UnitZ(), kPi - 1e-7)), kPi - 1e-7, 1e-9);
}

TEST(Pose, InverseComposesToIdentity)
{
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i)
    {
        const Pose p = oracle::random_pose(rng);
        const Pose e = p * p.inverse();
        EXPECT_LT((e.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT(e.translation.norm(), 1e-9);
        EXPECT_TRUE(is_proper_rotation(p.rotation));
    }
}

TEST(Pose, CompositionIsAssociative)
{
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i)
    {
        const Pose a = oracle::random_pose(rng);
        const Pose b = oracle::random_pose(rng);
        const Pose c = oracle::random_pose(rng);
        const Pose l = (a * b) * c;
        const Pose r = a * (b * c);
        EXPECT_LT((l.rotation - r.rotation).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((l.translation - r.translation).norm(), 1e-9);
    }
}

TEST(BoxDiagonal, KnownValues)
{
    EXPECT_NEAR(box_diagonal(Box3D::make(Vec3::Zero(), Vec3::Constant(0.5))), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(box_diagonal(Box3D::make(Vec3::Zero(), Vec3(1, 2, 2))), 6.0, 1e-15);
    EXPECT_THROW((void)Box3D::make(Vec3::Zero(), Vec3(1, 0, 1)), InvalidArgument);
    EXPECT_THROW((void)Box3D::make(Vec3::Zero(), Vec3(1, -1, 1)), InvalidArgument);
}

TEST(Iou3d, BasicCases)
{
    const auto unit = Box3D::make(Vec3::Zero(), Vec3::Constant(0.5));
    EXPECT_DOUBLE_EQ(iou3d_aabb(unit, unit), 1.0);
    EXPECT_EQ(iou3d_aabb(unit, Box3D::make(Vec3(3, 0, 0), Vec3::Constant(0.5))), 0.0);
    const auto shifted = Box3D::make(Vec3(0.5, 0, 0), Vec3::Constant(0.5));
    EXPECT_NEAR(iou3d_aabb(unit, shifted), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(oracle::voxel_iou(unit, shifted, 0.001), 1.0 / 3.0, 1e-3);
}

TEST(Iou3d, RejectsRotatedBoxes)
{
    const auto unit = Box3D::make(Vec3::Zero(), Vec3::Constant(0.5));
    const auto turned = Box3D::make(Vec3::Zero(), Vec3::Constant(0.5), rot_y(0.2));
    EXPECT_THROW((void)iou3d_aabb(unit, turned), InvalidArgument);
}

TEST(Iou3d, MatchesVoxelOracle)
{
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i)
    {
        const auto [a, b] = oracle::random_overlapping_pair(rng);
        EXPECT_NEAR(iou3d_aabb(a, b), oracle::voxel_iou(a, b, 0.001), 1e-3);
    }
}

TEST(AabbOfPoints, TwoPointsAndPadding)
{
    const std::vector<Vec3> two { Vec3::Zero(), Vec3::Ones() };
    const auto b = aabb_of_points(two);
    EXPECT_LT((b.center - Vec3::Constant(0.5)).norm(), 1e-15);
    EXPECT_LT((b.half_extents - Vec3::Constant(0.5)).norm(), 1e-15);

    const std::vector<Vec3> one { Vec3(1, 2, 3) };
    const auto p = aabb_of_points(one);
    EXPECT_EQ(p.half_extents, Vec3::Constant(kMinHalfExtent));
    EXPECT_EQ(p.center, Vec3(1, 2, 3));

    EXPECT_THROW((void)aabb_of_points(std::span<const Vec3> {}), EmptyInput);
}

TEST(AabbOfPoints, MatchesMinMaxScan)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 1000; ++i)
        pts.emplace_back(u(rng), u(rng), u(rng));
    double lo[3] = { 9, 9, 9 }, hi[3] = { -9, -9, -9 };
    for (const auto& p: pts)
        for (int k = 0; k < 3; ++k)
        {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    const auto b = aabb_of_points(pts);
    for (int k = 0; k < 3; ++k)
    {
        EXPECT_NEAR(b.center[k] - b.half_extents[k], lo[k], 1e-15);
        EXPECT_NEAR(b.center[k] + b.half_extents[k], hi[k], 1e-15);
    }
}

TEST(Box3D, WorldAabbEnclosesCorners)
{
    const auto b = Box3D::make(Vec3(1, 0, 2), Vec3(0.3, 0.5, 0.7), rot_y(0.6));
    const auto aabb = b.world_aabb();
    for (int corner = 0; corner < 8; ++corner)
    {
        const Vec3 s((corner & 1) ? 1 : -1, (corner & 2) ? 1 : -1, (corner & 4) ? 1 : -1);
        const Vec3 p = b.center + b.rotation * s.cwiseProduct(b.half_extents);
        EXPECT_TRUE(aabb.contains(p, 1e-12));
    }
}
