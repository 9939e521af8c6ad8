// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/kernels.hpp>
#include <memgrounder/scene.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mg
{

auto CameraIntrinsics::full_resolution() -> CameraIntrinsics
{
    return { 1169.6, 1167.1, 646.3, 489.9, 1296, 968 };
}

auto CameraIntrinsics::working() -> CameraIntrinsics
{
    return full_resolution().scaled(1.0 / 8.0);
}

auto CameraIntrinsics::scaled(double factor) const -> CameraIntrinsics
{
    if (!(factor > 0.0))
        throw InvalidArgument("CameraIntrinsics::scaled: factor must be positive");
    return {
        fx * factor,
        fy * factor,
        cx * factor,
        cy * factor,
        static_cast<int>(std::lround(width * factor)),
        static_cast<int>(std::lround(height * factor)),
    };
}

void CameraIntrinsics::validate() const
{
    if (!(fx > 0.0 && fy > 0.0))
        throw InvalidArgument("CameraIntrinsics: focal lengths must be positive");
    if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height))
        throw InvalidArgument("CameraIntrinsics: principal point must lie inside the image");
}

auto pixel_to_camera(double u, double v, double depth, const CameraIntrinsics& k) -> Vec3
{
    if (!(depth > 0.0))
        throw InvalidArgument("pixel_to_camera: depth must be positive");
    if (u < 0.0 || v < 0.0 || u > k.width || v > k.height)
        throw InvalidArgument("pixel_to_camera: pixel outside the image");
    return { (u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth };
}

auto camera_to_pixel(const Vec3& p, const CameraIntrinsics& k) -> PixelDepth
{
    return { k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z() };
}

auto Mask::count() const -> std::size_t
{
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t { 1 }));
}

auto iou2d(const Box2D& a, const Box2D& b) -> double
{
    const auto w = std::max(0, std::min(a.u1, b.u1) - std::max(a.u0, b.u0));
    const auto h = std::max(0, std::min(a.v1, b.v1) - std::max(a.v0, b.v0));
    const auto inter = static_cast<double>(w) * h;
    const auto uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

auto mask_bounds(const Mask& mask) -> std::optional<Box2D>
{
    auto out = Box2D { mask.width, mask.height, 0, 0 };
    auto any = false;
    for (int v = 0; v < mask.height; ++v)
        for (int u = 0; u < mask.width; ++u)
            if (mask.at(u, v))
            {
                any = true;
                out.u0 = std::min(out.u0, u);
                out.v0 = std::min(out.v0, v);
                out.u1 = std::max(out.u1, u + 1);
                out.v1 = std::max(out.v1, v + 1);
            }
    if (!any)
        return std::nullopt;
    return out;
}

auto SceneModel::find(int instance_id) const -> const ObjectInstance*
{
    for (const auto& inst: instances)
        if (inst.instance_id == instance_id)
            return &inst;
    return nullptr;
}

auto SceneModel::find_by_correspondence(int correspondence_id) const -> const ObjectInstance*
{
    for (const auto& inst: instances)
        if (inst.correspondence_id == correspondence_id)
            return &inst;
    return nullptr;
}

auto SceneModel::instances_of(const std::string& class_name) const -> std::vector<const ObjectInstance*>
{
    auto out = std::vector<const ObjectInstance*> {};
    for (const auto& inst: instances)
        if (inst.class_name == class_name)
            out.push_back(&inst);
    return out;
}

auto SceneModel::count_of(const std::string& class_name) const -> std::size_t
{
    return static_cast<std::size_t>(std::count_if(instances.begin(), instances.end(),
                                                  [&](const auto& inst) { return inst.class_name == class_name; }));
}

auto counterpart(const ObjectInstance& instance, const SceneModel& other) -> const ObjectInstance*
{
    if (!instance.correspondence_id)
        return nullptr;
    return other.find_by_correspondence(*instance.correspondence_id);
}

namespace
{
    auto to_slab(const Box3D& box, std::int32_t id, bool shell) -> kernels::SlabBox
    {
        auto slab = kernels::SlabBox {};
        for (int i = 0; i < 3; ++i)
        {
            slab.center[i] = box.center[i];
            slab.half[i] = box.half_extents[i];
            for (int j = 0; j < 3; ++j)
                slab.rotation[3 * i + j] = box.rotation(i, j);
        }
        slab.id = id;
        slab.shell = shell;
        return slab;
    }
} // namespace

auto render(const SceneModel& scene, const Pose& pose, const CameraIntrinsics& intrinsics) -> RenderedFrame
{
    intrinsics.validate();
    const auto w = intrinsics.width;
    const auto h = intrinsics.height;
    const auto n = intrinsics.pixel_count();

    auto boxes = std::vector<kernels::SlabBox> {};
    boxes.reserve(scene.instances.size() + 1);
    for (const auto& inst: scene.instances)
        boxes.push_back(to_slab(inst.box, inst.instance_id, false));
    boxes.push_back(to_slab(scene.extent, kShellId, true));

    auto dx = std::vector<double>(n);
    auto dy = std::vector<double>(n);
    auto dz = std::vector<double>(n);
    const Mat3& r = pose.rotation;
    for (int v = 0; v < h; ++v)
    {
        const auto cam_y = (v - intrinsics.cy) / intrinsics.fy;
        for (int u = 0; u < w; ++u)
        {
            const auto cam_x = (u - intrinsics.cx) / intrinsics.fx;
            const auto i = static_cast<std::size_t>(v) * w + u;
            dx[i] = r(0, 0) * cam_x + r(0, 1) * cam_y + r(0, 2);
            dy[i] = r(1, 0) * cam_x + r(1, 1) * cam_y + r(1, 2);
            dz[i] = r(2, 0) * cam_x + r(2, 1) * cam_y + r(2, 2);
        }
    }

    auto frame = RenderedFrame {
        .depth = DepthMap(w, h, std::numeric_limits<double>::infinity()),
        .instance_ids = IdMap(w, h, kBackgroundId),
        .pose = pose,
        .intrinsics = intrinsics,
        .scene_id = scene.scene_id,
    };

    const auto fan = kernels::RayFan {
        .origin = { pose.translation.x(), pose.translation.y(), pose.translation.z() },
        .dx = dx,
        .dy = dy,
        .dz = dz,
    };
    kernels::raycast(fan, boxes, frame.depth.data, frame.instance_ids.data);

    // Rays carry unit camera-z, so the hit distance already is z-depth.
    for (auto& d: frame.depth.data)
        if (!std::isfinite(d))
            d = 0.0;
    return frame;
}

auto instance_mask(const RenderedFrame& frame, std::int32_t instance_id) -> Mask
{
    auto mask = Mask(frame.instance_ids.width, frame.instance_ids.height);
    std::transform(frame.instance_ids.data.begin(), frame.instance_ids.data.end(), mask.data.begin(),
                   [&](std::int32_t id) { return static_cast<std::uint8_t>(id == instance_id); });
    return mask;
}

auto instance_moved(const ObjectInstance& prev, const ObjectInstance& curr, MoveTolerance tol) -> bool
{
    if (!prev.correspondence_id || prev.correspondence_id != curr.correspondence_id)
        throw InvalidArgument("instance_moved: instances are not correspondence-linked");
    const auto shift = (curr.box.center - prev.box.center).norm();
    const auto turn = geodesic_angle(prev.box.rotation, curr.box.rotation);
    return shift > tol.translation || turn > tol.rotation;
}

auto pose_from_yaw_pitch(const Vec3& position, double yaw_deg, double pitch_deg) -> Pose
{
    return { rot_y(deg2rad(yaw_deg)) * rot_x(deg2rad(pitch_deg)), position };
}

auto default_tour(const SceneModel& scene) -> std::vector<Pose>
{
    constexpr double inset = 0.9;
    constexpr double pitch = -20.0;
    constexpr double headings[] = { -60.0, -30.0, 0.0, 30.0, 60.0 };

    const Vec3 lo = scene.extent.center - scene.extent.half_extents;
    const Vec3 hi = scene.extent.center + scene.extent.half_extents;
    const auto y = scene.floor_level() - scene.camera_height;
    const auto x0 = lo.x() + inset, x1 = hi.x() - inset, xm = 0.5 * (x0 + x1);
    const auto z0 = lo.z() + inset, z1 = hi.z() - inset, zm = 0.5 * (z0 + z1);

    // Counter-clockwise around the room, starting at the min corner.
    const Vec3 stations[] = {
        { x0, y, z0 }, { xm, y, z0 }, { x1, y, z0 }, { x1, y, zm },
        { x1, y, z1 }, { xm, y, z1 }, { x0, y, z1 }, { x0, y, zm },
    };

    const Vec3 center = scene.standard_origin.translation;
    auto tour = std::vector<Pose> {};
    for (const auto& s: stations)
    {
        const Vec3 to_center = world::horizontal(center - s);
        const auto base_yaw = rad2deg(std::atan2(to_center.x(), to_center.z()));
        for (const auto offset: headings)
            tour.push_back(pose_from_yaw_pitch(s, base_yaw + offset, pitch));
    }
    return tour;
}

auto capture_memory(const SceneModel& scene, const CameraIntrinsics& intrinsics) -> std::vector<MemoryFrame>
{
    auto frames = std::vector<MemoryFrame> {};
    frames.reserve(scene.tour.size());
    for (std::size_t i = 0; i < scene.tour.size(); ++i)
        frames.push_back({ render(scene, scene.tour[i], intrinsics), static_cast<int>(i) });
    return frames;
}

} // namespace mg
