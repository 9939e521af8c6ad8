// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ten single-cube rooms with one reference viewpoint each, used to compare
// single-view and multi-view boxes under a perfect oracle.

#include <memgrounder/agent.hpp>
#include <memgrounder/oracle.hpp>
#include <memgrounder/policies.hpp>

#include <cmath>

namespace fixtures
{

struct CubeFixture
{
    mg::ScenePair scenes;
    mg::Box3D truth;
    mg::Pose reference_pose;
    int cube_id = 1;
};

inline auto cube_room(const std::string& id) -> mg::SceneModel
{
    auto s = mg::SceneModel {};
    s.scene_id = id;
    s.extent = mg::Box3D { mg::Vec3(0, -1.3, 0), mg::Vec3(4.0, 1.3, 4.0), mg::Mat3::Identity() };
    s.standard_origin = mg::Pose { mg::Mat3::Identity(), mg::Vec3(0, s.floor_level() - 1.5, 0) };
    return s;
}

/// Fixture `i` in [0, 10): cube size, placement and viewpoint vary with i.
/// Odd fixtures look from cube height straight at a face, so the single
/// view sees little depth; even fixtures look down from 1.5 m. Sides stay
/// at desk-object scale (0.2 m to 0.5 m) so visible-surface centroids fall
/// inside the 0.25 m candidate gate.
inline auto cube_fixture(int i) -> CubeFixture
{
    auto f = CubeFixture {};
    const bool face_on = i % 2 == 1;
    const double side = face_on ? 0.2 + 0.02 * (i / 2) : 0.3 + 0.05 * (i / 2);
    const mg::Vec3 center(-1.0 + 0.25 * i, -side / 2.0, 1.0 - 0.2 * i);
    f.truth = mg::Box3D { center, mg::Vec3::Constant(side / 2.0), mg::Mat3::Identity() };

    auto prev = cube_room("cube_prev_" + std::to_string(i));
    prev.instances.push_back({ f.cube_id, "cube", f.truth, 1 });
    prev.instances.push_back({ 2, "crate", mg::Box3D { mg::Vec3(2.5, -0.3, -2.5), mg::Vec3(0.4, 0.3, 0.3),
                                                       mg::Mat3::Identity() },
                               2 });
    auto curr = prev;
    curr.scene_id = "cube_curr_" + std::to_string(i);
    f.scenes = { prev, curr };

    const double azimuth = face_on ? 90.0 * (i / 2) : 25.0 + 31.0 * i;
    const double distance = 1.6 + 0.1 * (i % 3);
    const double a = mg::deg2rad(azimuth);
    const double eye_y = face_on ? center.y() : -1.5;
    const mg::Vec3 eye(center.x() + distance * std::sin(a), eye_y, center.z() + distance * std::cos(a));
    f.reference_pose = mg::look_at(eye, center);
    return f;
}

struct CubeRun
{
    double single_iou = 0.0;
    double fused_iou = 0.0;
    std::size_t fused_candidates = 0;
    int orbit_actions = 0;
};

inline auto run_cube_fixture(const CubeFixture& f, const mg::AgentConfig& config = {}) -> CubeRun
{
    const auto frame = mg::render(f.scenes.curr, f.reference_pose, config.intrinsics);
    auto truth = mg::GroundTruth { &f.scenes, { f.cube_id, {} }, { f.cube_id, {} } };
    auto oracle = mg::OracleBackend({}, truth);
    auto query = mg::GroundingQuery {};
    query.raw_text = "the cube";
    query.target_class = "cube";
    auto ledger = mg::CostLedger(f.reference_pose, config.speeds);
    auto trace = mg::Trace {};
    const auto mv = mg::multiview_ground(frame, query, f.scenes.curr, oracle, ledger, trace, config);
    auto run = CubeRun {};
    if (mv.single_view_box)
        run.single_iou = mg::iou3d_aabb(*mv.single_view_box, f.truth);
    if (mv.box)
        run.fused_iou = mg::iou3d_aabb(*mv.box, f.truth);
    run.fused_candidates = mv.fused_candidates;
    run.orbit_actions = ledger.actions();
    return run;
}

} // namespace fixtures
