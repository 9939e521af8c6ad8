// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/kernels.hpp>
#include <memgrounder/projection.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace mg
{

auto PointCloud::centroid() const -> Vec3
{
    if (points.empty())
        throw EmptyInput("PointCloud::centroid: empty cloud");
    Vec3 sum = Vec3::Zero();
    for (const auto& p: points)
        sum += p;
    return sum / static_cast<double>(points.size());
}

auto CandidateCloud::from(PointCloud cloud) -> CandidateCloud
{
    const auto box = aabb_of_points(cloud.points);
    const auto c = cloud.centroid();
    return { std::move(cloud), c, box.volume() };
}

namespace
{
    auto median(std::vector<double> values) -> double
    {
        const auto n = values.size();
        const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(values.begin(), mid, values.end());
        if (n % 2 == 1)
            return *mid;
        const auto upper = *mid;
        const auto lower = *std::max_element(values.begin(), mid);
        return 0.5 * (lower + upper);
    }

    using VoxelKey = std::array<std::int64_t, 3>;

    auto voxel_of(const Vec3& p, double voxel) -> VoxelKey
    {
        return { static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                 static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                 static_cast<std::int64_t>(std::floor(p.z() / voxel)) };
    }

    struct Component
    {
        std::vector<std::size_t> members;
        VoxelKey min_voxel;
    };

    // 26-connected voxel components; members keep input order.
    auto voxel_components(const std::vector<Vec3>& points, double voxel) -> std::vector<Component>
    {
        if (!(voxel > 0.0))
            throw InvalidArgument("voxel size must be positive");

        auto cells = std::map<VoxelKey, std::vector<std::size_t>> {};
        for (std::size_t i = 0; i < points.size(); ++i)
            cells[voxel_of(points[i], voxel)].push_back(i);

        auto label = std::map<VoxelKey, int> {};
        auto components = std::vector<Component> {};
        for (const auto& [seed, _]: cells)
        {
            if (label.contains(seed))
                continue;
            const auto id = static_cast<int>(components.size());
            auto comp = Component { {}, seed };
            auto stack = std::vector<VoxelKey> { seed };
            label[seed] = id;
            while (!stack.empty())
            {
                const auto cur = stack.back();
                stack.pop_back();
                const auto& idx = cells.at(cur);
                comp.members.insert(comp.members.end(), idx.begin(), idx.end());
                for (std::int64_t dx = -1; dx <= 1; ++dx)
                    for (std::int64_t dy = -1; dy <= 1; ++dy)
                        for (std::int64_t dz = -1; dz <= 1; ++dz)
                        {
                            const VoxelKey next { cur[0] + dx, cur[1] + dy, cur[2] + dz };
                            if (cells.contains(next) && !label.contains(next))
                            {
                                label[next] = id;
                                stack.push_back(next);
                            }
                        }
            }
            std::sort(comp.members.begin(), comp.members.end());
            components.push_back(std::move(comp));
        }
        return components;
    }

    auto subset(const std::vector<Vec3>& points, const std::vector<std::size_t>& idx) -> std::vector<Vec3>
    {
        auto out = std::vector<Vec3> {};
        out.reserve(idx.size());
        for (const auto i: idx)
            out.push_back(points[i]);
        return out;
    }
} // namespace

auto denoise_depth_mask(const RenderedFrame& frame, const Mask& mask, double mad_k, double mad_floor)
    -> std::optional<Mask>
{
    if (mask.width != frame.depth.width || mask.height != frame.depth.height)
        throw InvalidArgument("denoise_depth_mask: mask and frame sizes differ");

    auto depths = std::vector<double> {};
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i] && frame.depth.data[i] > 0.0)
            depths.push_back(frame.depth.data[i]);
    if (depths.empty())
        return std::nullopt;

    const auto med = median(depths);
    auto deviations = std::vector<double> {};
    deviations.reserve(depths.size());
    for (const auto d: depths)
        deviations.push_back(std::abs(d - med));
    const auto gate = mad_k * std::max(median(std::move(deviations)), mad_floor);

    auto out = Mask(mask.width, mask.height);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < mask.data.size(); ++i)
    {
        const auto d = frame.depth.data[i];
        if (mask.data[i] && d > 0.0 && std::abs(d - med) <= gate)
        {
            out.data[i] = 1;
            ++kept;
        }
    }
    if (kept == 0)
        return std::nullopt;
    return out;
}

auto mask_to_cloud(const RenderedFrame& frame, const Mask& mask, int frame_id) -> PointCloud
{
    if (mask.width != frame.depth.width || mask.height != frame.depth.height)
        throw InvalidArgument("mask_to_cloud: mask and frame sizes differ");

    auto u = std::vector<double> {};
    auto v = std::vector<double> {};
    auto d = std::vector<double> {};
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col)
        {
            const auto depth = frame.depth.at(col, row);
            if (mask.at(col, row) && depth > 0.0)
            {
                u.push_back(col);
                v.push_back(row);
                d.push_back(depth);
            }
        }
    if (d.empty())
        throw EmptyInput("mask_to_cloud: mask selects no pixel with depth");

    const auto& k = frame.intrinsics;
    auto rig = kernels::PinholeRig { k.fx, k.fy, k.cx, k.cy, {}, {} };
    for (int i = 0; i < 9; ++i)
        rig.rotation[i] = frame.pose.rotation(i / 3, i % 3);
    for (int i = 0; i < 3; ++i)
        rig.translation[i] = frame.pose.translation[i];

    const auto n = d.size();
    auto x = std::vector<double>(n), y = std::vector<double>(n), z = std::vector<double>(n);
    kernels::backproject(rig, u, v, d, x, y, z);

    auto cloud = PointCloud { {}, frame_id };
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.emplace_back(x[i], y[i], z[i]);
    return cloud;
}

auto select_candidate(const RenderedFrame& frame, const std::vector<Box2D>& boxes, const Segmenter& segment,
                      const Vec3& ref_center, bool limit_active, const CandidateSettings& settings, int frame_id)
    -> std::optional<CandidateCloud>
{
    auto best = std::optional<CandidateCloud> {};
    auto best_distance = 0.0;
    for (const auto& box: boxes)
    {
        const auto clean = denoise_depth_mask(frame, segment(frame, box), settings.mad_k, settings.mad_floor);
        if (!clean)
            continue;
        auto candidate = CandidateCloud::from(mask_to_cloud(frame, *clean, frame_id));
        const auto distance = (candidate.centroid - ref_center).norm();
        if (!best || distance < best_distance)
        {
            best_distance = distance;
            best = std::move(candidate);
        }
    }
    if (best && limit_active && best_distance > settings.limit)
        return std::nullopt;
    return best;
}

auto volume_filter(std::vector<CandidateCloud> clouds, double ratio) -> std::vector<CandidateCloud>
{
    std::stable_sort(clouds.begin(), clouds.end(),
                     [](const CandidateCloud& a, const CandidateCloud& b) { return a.volume < b.volume; });
    auto kept = std::vector<CandidateCloud> {};
    auto largest_kept = 0.0;
    for (auto& c: clouds)
    {
        if (!kept.empty() && c.volume > ratio * largest_kept)
            continue;
        largest_kept = std::max(largest_kept, c.volume);
        kept.push_back(std::move(c));
    }
    return kept;
}

auto cluster_largest(const PointCloud& cloud, double voxel) -> PointCloud
{
    if (cloud.empty())
        throw EmptyInput("cluster_largest: empty cloud");
    const auto components = voxel_components(cloud.points, voxel);
    // Components are discovered in ascending voxel order, so the first of
    // equally sized components has the smallest voxel index.
    const auto* best = &components.front();
    for (const auto& c: components)
        if (c.members.size() > best->members.size())
            best = &c;
    return { subset(cloud.points, best->members), cloud.source_frame_id };
}

auto fuse_and_box(const PointCloud& reference, const std::vector<CandidateCloud>& selected, const FusionSettings& settings)
    -> Box3D
{
    if (reference.empty())
        throw EmptyInput("fuse_and_box: empty reference cloud");

    const auto core = cluster_largest(reference, settings.voxel);
    const auto kept = selected.empty() ? std::vector<CandidateCloud> {} : volume_filter(selected, settings.volume_ratio);

    auto merged = core.points;
    for (const auto& c: kept)
        merged.insert(merged.end(), c.cloud.points.begin(), c.cloud.points.end());

    // Index 0 belongs to the reference core.
    auto fused = PointCloud { {}, reference.source_frame_id };
    for (const auto& comp: voxel_components(merged, settings.voxel))
        if (comp.members.front() == 0)
        {
            fused.points = subset(merged, comp.members);
            break;
        }

    if (settings.debug_dir)
    {
        const auto& dir = *settings.debug_dir;
        std::filesystem::create_directories(dir);
        write_xyz(dir / (settings.debug_tag + "_reference.xyz"), reference);
        write_xyz(dir / (settings.debug_tag + "_reference_core.xyz"), core);
        for (std::size_t i = 0; i < selected.size(); ++i)
            write_xyz(dir / (settings.debug_tag + "_candidate_" + std::to_string(i) + ".xyz"), selected[i].cloud);
        for (std::size_t i = 0; i < kept.size(); ++i)
            write_xyz(dir / (settings.debug_tag + "_kept_" + std::to_string(i) + ".xyz"), kept[i].cloud);
        write_xyz(dir / (settings.debug_tag + "_fused.xyz"), fused);
    }
    return aabb_of_points(fused.points);
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud)
{
    auto out = std::ofstream(path);
    if (!out)
        throw LoadError(path.string(), "cannot write file");
    out.precision(9);
    for (const auto& p: cloud.points)
        out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

} // namespace mg
