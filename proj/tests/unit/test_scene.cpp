// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>
#include <memgrounder/scene.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace mg;

namespace
{

auto room(double half = 4.0) -> SceneModel
{
    auto s = SceneModel {};
    s.scene_id = "test";
    s.extent = Box3D { Vec3(0, -1.3, 0), Vec3(half, 1.3, half), Mat3::Identity() };
    s.standard_origin = Pose { Mat3::Identity(), Vec3(0, s.floor_level() - 1.5, 0) };
    return s;
}

auto add(SceneModel& s, int id, const std::string& cls, const Vec3& c, const Vec3& h, const Mat3& r = Mat3::Identity())
    -> void
{
    s.instances.push_back({ id, cls, Box3D { c, h, r }, std::nullopt });
}

auto cluttered_room(std::uint64_t seed) -> SceneModel
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xz(-3.0, 3.0);
    std::uniform_real_distribution<double> h(0.15, 0.6);
    std::uniform_real_distribution<double> yaw(-1.5, 1.5);
    auto s = room();
    for (int i = 0; i < 12; ++i)
    {
        const Vec3 half(h(rng), h(rng), h(rng));
        add(s, i, "box", Vec3(xz(rng), -half.y(), xz(rng)), half, rot_y(yaw(rng)));
    }
    return s;
}

auto write_temp(const std::string& name, const std::string& text) -> std::filesystem::path
{
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

auto minimal_pair_json() -> nlohmann::json
{
    const auto instance = [](int id, std::optional<int> link) {
        auto j = nlohmann::json {
            { "instance_id", id },
            { "class_name", "chair" },
            { "center", { 0.0, -0.4, 0.0 } },
            { "half_extents", { 0.3, 0.4, 0.3 } },
            { "rotation_rowmajor", { 1, 0, 0, 0, 1, 0, 0, 0, 1 } },
        };
        if (link)
            j["correspondence_id"] = *link;
        return j;
    };
    const auto scene = [&](const std::string& id) {
        return nlohmann::json {
            { "scene_id", id },
            { "extent", { { "center", { 0.0, -1.3, 0.0 } }, { "half_extents", { 3.0, 1.3, 3.0 } } } },
            { "camera_height", 1.5 },
            { "instances", { instance(1, 10), instance(2, std::nullopt) } },
        };
    };
    return { { "schema_version", 1 }, { "prev_scene", scene("a") }, { "curr_scene", scene("b") } };
}

} // namespace

TEST(Intrinsics, DefaultsAndScaling)
{
    const auto full = CameraIntrinsics::full_resolution();
    EXPECT_EQ(full.width, 1296);
    EXPECT_EQ(full.height, 968);
    const auto w = CameraIntrinsics::working();
    EXPECT_EQ(w.width, 162);
    EXPECT_EQ(w.height, 121);
    EXPECT_DOUBLE_EQ(w.fx, 1169.6 / 8);
    EXPECT_DOUBLE_EQ(w.cy, 489.9 / 8);
    EXPECT_NO_THROW(w.validate());
    EXPECT_THROW((CameraIntrinsics { -1, 1, 5, 5, 10, 10 }.validate()), InvalidArgument);
    EXPECT_THROW((CameraIntrinsics { 1, 1, 12, 5, 10, 10 }.validate()), InvalidArgument);
}

TEST(PixelToCamera, PrincipalAndTangentRays)
{
    const auto k = CameraIntrinsics::full_resolution();
    const Vec3 a = pixel_to_camera(k.cx, k.cy, 2.0, k);
    EXPECT_EQ(a, Vec3(0, 0, 2.0));
    const auto narrow = CameraIntrinsics { 50, 50, 60, 40, 121, 81 };
    const Vec3 b = pixel_to_camera(narrow.cx + narrow.fx, narrow.cy, 1.0, narrow);
    EXPECT_NEAR((b - Vec3(1, 0, 1)).norm(), 0.0, 1e-12);
    EXPECT_THROW((void)pixel_to_camera(10, 10, 0.0, k), InvalidArgument);
    EXPECT_THROW((void)pixel_to_camera(-1, 10, 1.0, k), InvalidArgument);
}

TEST(PixelToCamera, RoundTrip)
{
    const auto k = CameraIntrinsics::full_resolution();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, k.width), v(0, k.height), d(0.05, 20.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double pu = u(rng), pv = v(rng), pd = d(rng);
        const auto back = camera_to_pixel(pixel_to_camera(pu, pv, pd, k), k);
        EXPECT_LT(std::abs(back.u - pu), 1e-6);
        EXPECT_LT(std::abs(back.v - pv), 1e-6);
        EXPECT_LT(std::abs(back.depth - pd), 1e-6);
    }
}

TEST(Render, AxisOnRayHitsWallSizedFace)
{
    auto s = room();
    add(s, 5, "wall_panel", Vec3(0, -1.3, 2.0 + 0.1), Vec3(3.0, 1.2, 0.1));
    const Pose p { Mat3::Identity(), Vec3(0, -1.3, 0) };
    const auto k = CameraIntrinsics { 100, 100, 50, 40, 101, 81 };
    const auto f = render(s, p, k);
    EXPECT_NEAR(f.depth.at(50, 40), 2.0, 1e-12);
    EXPECT_EQ(f.instance_ids.at(50, 40), 5);
}

TEST(Render, EmptySceneSeesOnlyShell)
{
    const auto s = room();
    const auto f = render(s, s.standard_origin, CameraIntrinsics::working());
    for (std::size_t i = 0; i < f.instance_ids.size(); ++i)
    {
        EXPECT_EQ(f.instance_ids.data[i], kShellId);
        EXPECT_GT(f.depth.data[i], 0.0);
    }
}

TEST(Render, CubeNearFaceMatchesSlabOracle)
{
    auto s = room();
    add(s, 1, "cube", Vec3(0, -1.5, 3.0), Vec3::Constant(0.5));
    const Pose p { Mat3::Identity(), Vec3(0, -1.5, 0) };
    const auto k = CameraIntrinsics { 100, 100, 50, 40, 101, 81 };
    const auto f = render(s, p, k);
    const auto oracle_t = oracle::ray_box(p.translation, Vec3::UnitZ(), s.instances[0].box, false);
    ASSERT_TRUE(oracle_t);
    EXPECT_NEAR(*oracle_t, 2.5, 1e-12);
    EXPECT_NEAR(f.depth.at(50, 40), *oracle_t, 1e-12);
    EXPECT_EQ(f.instance_ids.at(50, 40), 1);
}

TEST(Render, DepthAgreesWithReshotRays)
{
    const auto s = cluttered_room(4);
    const auto k = CameraIntrinsics::working();
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pu(0, k.width - 1), pv(0, k.height - 1);
    for (int view = 0; view < 3; ++view)
    {
        const auto pose = pose_from_yaw_pitch(Vec3(0.4 * view, -1.5, -0.3 * view), 70.0 * view, -20.0);
        const auto f = render(s, pose, k);
        for (int i = 0; i < 1000; ++i)
        {
            const int u = pu(rng), v = pv(rng);
            const Vec3 dir = pose.rotation * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& inst: s.instances)
                if (const auto t = oracle::ray_box(pose.translation, dir, inst.box, false); t && *t < best)
                    best = *t;
            const auto shell = oracle::ray_box(pose.translation, dir, s.extent, true);
            ASSERT_TRUE(shell);
            EXPECT_LE(f.depth.at(u, v), *shell + 1e-9);
            if (f.instance_ids.at(u, v) >= 0)
                EXPECT_NEAR(f.depth.at(u, v), best, 1e-6);
            else
                EXPECT_NEAR(f.depth.at(u, v), *shell, 1e-6);
        }
    }
}

TEST(Render, Deterministic)
{
    const auto s = cluttered_room(6);
    const auto pose = pose_from_yaw_pitch(Vec3(0.2, -1.5, 0.1), 33.0, -15.0);
    const auto a = render(s, pose, CameraIntrinsics::working());
    const auto b = render(s, pose, CameraIntrinsics::working());
    EXPECT_TRUE(a.depth == b.depth);
    EXPECT_TRUE(a.instance_ids == b.instance_ids);
}

TEST(Render, LowResolutionMatchesSubsampledFullResolution)
{
    const auto s = cluttered_room(7);
    const auto pose = pose_from_yaw_pitch(Vec3(0.0, -1.5, 0.0), 20.0, -20.0);
    const auto lo = render(s, pose, CameraIntrinsics::working());
    const auto hi = render(s, pose, CameraIntrinsics::full_resolution());
    int compared = 0;
    for (int v = 0; v < lo.depth.height; ++v)
        for (int u = 0; u < lo.depth.width; ++u)
        {
            if (8 * u >= hi.depth.width || 8 * v >= hi.depth.height)
                continue;
            ASSERT_NEAR(lo.depth.at(u, v), hi.depth.at(8 * u, 8 * v), 1e-6);
            ++compared;
        }
    EXPECT_GT(compared, 19000);
}

TEST(InstanceMask, PartitionAndAbsentIds)
{
    const auto s = cluttered_room(8);
    const auto f = render(s, pose_from_yaw_pitch(Vec3(0, -1.5, 0), 0.0, -25.0), CameraIntrinsics::working());
    std::size_t total = instance_mask(f, kShellId).count() + instance_mask(f, kBackgroundId).count();
    for (const auto& inst: s.instances)
    {
        const auto m = instance_mask(f, inst.instance_id);
        std::size_t brute = 0;
        for (auto id: f.instance_ids.data)
            brute += id == inst.instance_id;
        EXPECT_EQ(m.count(), brute);
        total += m.count();
    }
    EXPECT_EQ(total, f.instance_ids.size());
    EXPECT_TRUE(instance_mask(f, 999).empty());
}

TEST(InstanceMask, EmptyWhenBehindCamera)
{
    auto s = room();
    add(s, 1, "crate", Vec3(0, -1.5, -2.0), Vec3::Constant(0.4));
    add(s, 2, "crate", Vec3(0.5, -1.2, -3.0), Vec3::Constant(0.6), rot_y(0.7));
    const auto f = render(s, Pose { Mat3::Identity(), Vec3(0, -1.5, 0) }, CameraIntrinsics::working());
    EXPECT_TRUE(instance_mask(f, 1).empty());
    EXPECT_TRUE(instance_mask(f, 2).empty());
}

TEST(InstanceMoved, Tolerances)
{
    ObjectInstance a { 1, "vase", Box3D { Vec3(1, 0, 1), Vec3::Constant(0.1), Mat3::Identity() }, 4 };
    auto b = a;
    EXPECT_FALSE(instance_moved(a, b));
    b.box.center.x() += 0.5;
    EXPECT_TRUE(instance_moved(a, b));
    b = a;
    b.box.center.z() += 0.04;
    EXPECT_FALSE(instance_moved(a, b));
    b = a;
    b.box.rotation = rot_y(deg2rad(10.0));
    EXPECT_TRUE(instance_moved(a, b));
    b = a;
    b.correspondence_id = 5;
    EXPECT_THROW((void)instance_moved(a, b), InvalidArgument);
}

TEST(Memory, FrameIdsIncrease)
{
    auto s = cluttered_room(9);
    s.tour = default_tour(s);
    EXPECT_EQ(s.tour.size(), 40u);
    const auto frames = capture_memory(s, CameraIntrinsics::working());
    for (std::size_t i = 1; i < frames.size(); ++i)
        EXPECT_LT(frames[i - 1].frame_id, frames[i].frame_id);
    for (const auto& p: s.tour)
        EXPECT_TRUE(is_proper_rotation(p.rotation));
}

TEST(LoadScenePair, ParsesMinimalDocument)
{
    const auto p = write_temp("mg_min_pair.json", minimal_pair_json().dump());
    const auto pair = load_scene_pair(p);
    EXPECT_EQ(pair.prev.scene_id, "a");
    EXPECT_EQ(pair.curr.instances.size(), 2u);
    EXPECT_EQ(pair.prev.tour.size(), 40u);
    EXPECT_NEAR(pair.prev.standard_origin.translation.y(), -1.5, 1e-12);
}

TEST(LoadScenePair, RejectsDuplicateIds)
{
    auto doc = minimal_pair_json();
    doc["curr_scene"]["instances"][1]["instance_id"] = 1;
    try
    {
        (void)parse_scene_pair(doc);
        FAIL() << "expected LoadError";
    }
    catch (const LoadError& e)
    {
        EXPECT_NE(std::string(e.what()).find("duplicate instance_id 1"), std::string::npos);
        EXPECT_EQ(e.path(), "$.curr_scene.instances[1].instance_id");
    }
}

TEST(LoadScenePair, RejectsDanglingCorrespondence)
{
    auto doc = minimal_pair_json();
    doc["curr_scene"]["instances"][0]["correspondence_id"] = 77;
    EXPECT_THROW((void)parse_scene_pair(doc), LoadError);
}

TEST(LoadScenePair, RejectsSchemaViolations)
{
    auto a = minimal_pair_json();
    a["prev_scene"]["instances"][0].erase("class_name");
    EXPECT_THROW((void)parse_scene_pair(a), LoadError);
    auto b = minimal_pair_json();
    b["prev_scene"]["instances"][0]["center"] = { 10.0, 0.0, 0.0 };
    EXPECT_THROW((void)parse_scene_pair(b), LoadError);
    auto c = minimal_pair_json();
    c["prev_scene"]["instances"][0]["rotation_rowmajor"] = { 2, 0, 0, 0, 1, 0, 0, 0, 1 };
    EXPECT_THROW((void)parse_scene_pair(c), LoadError);
    EXPECT_THROW((void)load_scene_pair("/nonexistent/pair.json"), LoadError);
    EXPECT_THROW((void)load_scene_pair(write_temp("mg_bad.json", "{ nope")), LoadError);
}
