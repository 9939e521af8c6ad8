// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/geometry.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mg
{

struct CameraIntrinsics
{
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    /// 1296x968 ScanNet camera used for every memory frame of the benchmark.
    static auto full_resolution() -> CameraIntrinsics;
    /// Desk-scale working camera: full_resolution() scaled by 1/8 (162x121).
    static auto working() -> CameraIntrinsics;

    /// Scales focal lengths, principal point and resolution by `factor`.
    [[nodiscard]] auto scaled(double factor) const -> CameraIntrinsics;
    [[nodiscard]] auto pixel_count() const -> std::size_t
    {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    /// Throws InvalidArgument when focal lengths or principal point are out of range.
    void validate() const;

    friend auto operator==(const CameraIntrinsics&, const CameraIntrinsics&) -> bool = default;
};

/// Pinhole back-projection of pixel (u, v) at z-depth `depth`.
[[nodiscard]] auto pixel_to_camera(double u, double v, double depth, const CameraIntrinsics& k) -> Vec3;

struct PixelDepth
{
    double u;
    double v;
    double depth;
};

[[nodiscard]] auto camera_to_pixel(const Vec3& p, const CameraIntrinsics& k) -> PixelDepth;

/// Row-major image with one value per pixel.
template <class T>
struct Image
{
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill): width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    [[nodiscard]] auto at(int u, int v) const -> const T& { return data[static_cast<std::size_t>(v) * width + u]; }
    [[nodiscard]] auto at(int u, int v) -> T& { return data[static_cast<std::size_t>(v) * width + u]; }
    [[nodiscard]] auto size() const -> std::size_t { return data.size(); }

    friend auto operator==(const Image&, const Image&) -> bool = default;
};

using DepthMap = Image<double>;
using IdMap = Image<std::int32_t>;

/// Boolean pixel mask; stored as bytes for fast iteration.
struct Mask: Image<std::uint8_t>
{
    using Image<std::uint8_t>::Image;
    Mask(int w, int h): Image<std::uint8_t>(w, h, 0) {}

    [[nodiscard]] auto count() const -> std::size_t;
    [[nodiscard]] auto empty() const -> bool { return count() == 0; }
};

/// Pixel rectangle, half-open: u in [u0, u1), v in [v0, v1).
struct Box2D
{
    int u0 = 0;
    int v0 = 0;
    int u1 = 0;
    int v1 = 0;

    [[nodiscard]] auto area() const -> long { return static_cast<long>(u1 - u0) * (v1 - v0); }
    [[nodiscard]] auto contains(int u, int v) const -> bool { return u >= u0 && u < u1 && v >= v0 && v < v1; }

    friend auto operator==(const Box2D&, const Box2D&) -> bool = default;
};

/// Intersection over union of two pixel rectangles.
[[nodiscard]] auto iou2d(const Box2D& a, const Box2D& b) -> double;

/// Tight bounds of the set pixels; nullopt for an empty mask.
[[nodiscard]] auto mask_bounds(const Mask& mask) -> std::optional<Box2D>;

constexpr std::int32_t kBackgroundId = -1;
constexpr std::int32_t kShellId = -2;

struct ObjectInstance
{
    int instance_id = 0;
    std::string class_name;
    Box3D box;
    /// Identity of the same physical object in the paired scan.
    std::optional<int> correspondence_id;
};

struct SceneModel
{
    std::string scene_id;
    std::vector<ObjectInstance> instances;
    Box3D extent;
    double camera_height = 1.5;
    /// Origin of the standardized frame: floor centroid lifted to camera
    /// height, OpenCV orientation aligned with the world axes.
    Pose standard_origin;
    /// Pre-captured camera tour (memory frames of S_p, the wandering tour of S_c).
    std::vector<Pose> tour;

    [[nodiscard]] auto find(int instance_id) const -> const ObjectInstance*;
    [[nodiscard]] auto find_by_correspondence(int correspondence_id) const -> const ObjectInstance*;
    [[nodiscard]] auto instances_of(const std::string& class_name) const -> std::vector<const ObjectInstance*>;
    [[nodiscard]] auto count_of(const std::string& class_name) const -> std::size_t;
    [[nodiscard]] auto floor_level() const -> double { return extent.center.y() + extent.half_extents.y(); }
};

/// Counterpart of `instance` in `other`, resolved through correspondence ids.
[[nodiscard]] auto counterpart(const ObjectInstance& instance, const SceneModel& other) -> const ObjectInstance*;

struct ScenePair
{
    SceneModel prev;
    SceneModel curr;
};

struct RenderedFrame
{
    DepthMap depth;
    IdMap instance_ids;
    Pose pose;
    CameraIntrinsics intrinsics;
    /// Scene the frame was rendered from; lets the ground-truth oracle resolve ids.
    std::string scene_id;
};

struct MemoryFrame
{
    RenderedFrame frame;
    int frame_id = 0;
};

/// Nearest-hit raycast of every pixel against the instance boxes and the
/// room shell. Depth is z-depth in meters, 0 where nothing is hit.
[[nodiscard]] auto render(const SceneModel& scene, const Pose& pose, const CameraIntrinsics& intrinsics)
    -> RenderedFrame;

[[nodiscard]] auto instance_mask(const RenderedFrame& frame, std::int32_t instance_id) -> Mask;

struct MoveTolerance
{
    double translation = 0.05;
    double rotation = deg2rad(5.0);
};

/// True when the linked instance changed position or orientation beyond the
/// tolerances. Throws InvalidArgument if the two are not correspondence-linked.
[[nodiscard]] auto instance_moved(const ObjectInstance& prev, const ObjectInstance& curr, MoveTolerance tol = {})
    -> bool;

/// Camera pose from a position and yaw/pitch in degrees: yaw turns about
/// gravity towards +X, positive pitch looks up.
[[nodiscard]] auto pose_from_yaw_pitch(const Vec3& position, double yaw_deg, double pitch_deg) -> Pose;

/// Perimeter tour used when a scene file carries none: eight stations inset
/// from the walls, five headings each, pitched down 20 degrees.
[[nodiscard]] auto default_tour(const SceneModel& scene) -> std::vector<Pose>;

/// Renders the scene's tour as memory frames, ids in capture order.
[[nodiscard]] auto capture_memory(const SceneModel& scene, const CameraIntrinsics& intrinsics)
    -> std::vector<MemoryFrame>;

/// Reads and validates a scene-pair document; see json_io.hpp for the schema.
[[nodiscard]] auto load_scene_pair(const std::filesystem::path& path) -> ScenePair;

} // namespace mg
