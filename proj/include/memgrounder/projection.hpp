// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/geometry.hpp>
#include <memgrounder/scene.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace mg
{

struct PointCloud
{
    std::vector<Vec3> points;
    int source_frame_id = -1;

    [[nodiscard]] auto empty() const -> bool { return points.empty(); }
    [[nodiscard]] auto size() const -> std::size_t { return points.size(); }
    /// Mean of the points; throws EmptyInput for an empty cloud.
    [[nodiscard]] auto centroid() const -> Vec3;
};

/// A cloud with its centroid and AABB volume cached.
struct CandidateCloud
{
    PointCloud cloud;
    Vec3 centroid = Vec3::Zero();
    double volume = 0.0;

    /// Throws EmptyInput for an empty cloud.
    static auto from(PointCloud cloud) -> CandidateCloud;
};

/// Median/MAD depth gating. Keeps mask pixels with
/// |depth - median| <= mad_k * max(MAD, mad_floor); zero depths are always
/// dropped. Returns nullopt when nothing survives.
[[nodiscard]] auto denoise_depth_mask(const RenderedFrame& frame, const Mask& mask, double mad_k = 3.0,
                                      double mad_floor = 0.02) -> std::optional<Mask>;

/// Back-projects every mask pixel with positive depth into world
/// coordinates. Throws EmptyInput when the mask selects nothing usable.
[[nodiscard]] auto mask_to_cloud(const RenderedFrame& frame, const Mask& mask, int frame_id = -1) -> PointCloud;

using Segmenter = std::function<Mask(const RenderedFrame&, const Box2D&)>;

struct CandidateSettings
{
    double limit = 0.25;
    double mad_k = 3.0;
    double mad_floor = 0.02;
};

/// Segments and projects each box, then keeps the cloud whose centroid is
/// nearest `ref_center`. With `limit_active`, a pick farther than
/// settings.limit is rejected.
[[nodiscard]] auto select_candidate(const RenderedFrame& frame, const std::vector<Box2D>& boxes,
                                    const Segmenter& segment, const Vec3& ref_center, bool limit_active,
                                    const CandidateSettings& settings = {}, int frame_id = -1)
    -> std::optional<CandidateCloud>;

/// Sorts by volume and drops every cloud larger than `ratio` times the
/// largest volume kept so far. The smallest cloud always survives.
[[nodiscard]] auto volume_filter(std::vector<CandidateCloud> clouds, double ratio = 2.0)
    -> std::vector<CandidateCloud>;

/// Points of the largest 26-connected voxel component. Ties go to the
/// component whose smallest voxel index is lexicographically first.
[[nodiscard]] auto cluster_largest(const PointCloud& cloud, double voxel = 0.05) -> PointCloud;

struct FusionSettings
{
    double volume_ratio = 2.0;
    double voxel = 0.05;
    /// When set, every stage is written there as ASCII XYZ.
    std::optional<std::filesystem::path> debug_dir;
    std::string debug_tag = "fusion";
};

/// Fuses the reference with the volume-filtered candidates and boxes the
/// voxel component that holds the reference's main cluster.
[[nodiscard]] auto fuse_and_box(const PointCloud& reference, const std::vector<CandidateCloud>& selected,
                                const FusionSettings& settings = {}) -> Box3D;

/// One "x y z" line per point.
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

} // namespace mg
