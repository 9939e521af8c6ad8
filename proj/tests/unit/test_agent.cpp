// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/bench.hpp>
#include <memgrounder/errors.hpp>

#include "mock_service.hpp"

#include <gtest/gtest.h>

using namespace mg;

namespace
{

const auto kData = std::filesystem::path(MG_SOURCE_DIR) / "tests" / "data";

auto golden_episodes() -> std::vector<Episode> { return load_episodes(kData / "golden_episodes.jsonl"); }

auto episode_named(const std::string& id) -> Episode
{
    for (const auto& e: golden_episodes())
        if (e.episode_id == id)
            return e;
    throw std::runtime_error("no golden episode " + id);
}

/// Golden suite worlds, loaded once for the whole file.
auto golden_suite() -> Suite&
{
    static auto suite = Suite(golden_episodes(), kData, BenchConfig {});
    return suite;
}

auto run_mcg(const std::string& id, const BenchConfig& config = {}) -> MethodRun
{
    const auto e = episode_named(id);
    const auto w = golden_suite().world(e);
    auto oracle = OracleBackend(config.oracle, ground_truth_of(e, *w.scenes), config.stitch_budget);
    return run_method(Method::mcg, e, w, oracle, config);
}

auto count_actions(const Trace& t, std::string_view reason) -> int
{
    auto n = 0;
    for (const auto& r: t.records())
        if (r["event_type"] == "action" && r["reason"] == reason)
            ++n;
    return n;
}

/// Phases in the order the trace entered them.
auto phases(const Trace& t) -> std::vector<std::string>
{
    auto out = std::vector<std::string> { "classify" };
    for (const auto& r: t.records())
        if (r["event_type"] == "phase")
            out.push_back(r["phase"].get<std::string>());
    return out;
}

auto note_detail(const Trace& t, std::string_view what) -> std::optional<nlohmann::ordered_json>
{
    for (const auto& r: t.records())
        if (r["event_type"] == "note" && r["what"] == what)
            return r.contains("detail") ? r["detail"] : nlohmann::ordered_json::object();
    return std::nullopt;
}

constexpr int kOrbit = 16;
constexpr int kSweep = 20;

} // namespace

// Action counts per branch of the decision procedure.

TEST(AgentBranches, VerifiableStaticRevisitsAndOrbits)
{
    const auto run = run_mcg("office_support_static");
    ASSERT_TRUE(run.result.succeeded());
    // Target and anchor revisits, then the orbit.
    EXPECT_EQ(run.result.costs.actions, 2 + kOrbit);
    EXPECT_EQ(phases(run.trace),
              (std::vector<std::string> { "classify", "retrieve", "verify", "multiview", "done" }));
}

TEST(AgentBranches, VerifiableTargetMovedSweepsFromAnchor)
{
    const auto run = run_mcg("office_support_target_moved");
    ASSERT_TRUE(run.result.succeeded());
    EXPECT_EQ(run.result.costs.actions, 2 + kSweep + kOrbit);
    EXPECT_EQ(count_actions(run.trace, "sras_up") + count_actions(run.trace, "sras_down") +
                  count_actions(run.trace, "sras_horizontal"),
              kSweep);
}

TEST(AgentBranches, VerifiableAnchorMovedStopsAtFirstSighting)
{
    for (const auto* id: { "living_support_anchor_moved", "kitchen_vertical_anchor_moved" })
    {
        const auto run = run_mcg(id);
        ASSERT_TRUE(run.result.succeeded()) << id;
        const auto sighted = note_detail(run.trace, "anchor sighted");
        ASSERT_TRUE(sighted.has_value()) << id;
        const auto k = (*sighted)["step"].get<int>();
        EXPECT_GE(k, 1);
        EXPECT_LE(k, kSweep);
        EXPECT_EQ(count_actions(run.trace, "oss"), k);
        // Two revisits, the walk to the center, k sweep steps, relation sweep, orbit.
        EXPECT_EQ(run.result.costs.actions, 3 + k + kSweep + kOrbit) << id;
    }
}

TEST(AgentBranches, UnverifiableAnchorStillSweepsFromAnchor)
{
    const auto run = run_mcg("office_horizontal_static");
    ASSERT_TRUE(run.result.succeeded());
    EXPECT_EQ(run.result.costs.actions, 1 + kSweep + kOrbit);
    EXPECT_EQ(count_actions(run.trace, "sras_horizontal"), kSweep);
}

TEST(AgentBranches, UnverifiableAnchorMovedSearchesFromCenter)
{
    const auto run = run_mcg("kitchen_horizontal_anchor_moved");
    ASSERT_TRUE(run.result.succeeded());
    EXPECT_EQ(run.result.costs.actions, 2 + kSweep + kOrbit);
    EXPECT_EQ(count_actions(run.trace, "center"), 1);
    EXPECT_EQ(count_actions(run.trace, "oss"), kSweep);
}

TEST(AgentBranches, AnchorMissingFromMemoryFallsBack)
{
    for (const auto* id: { "living_horizontal_new_anchor", "kitchen_support_new_anchor" })
    {
        const auto run = run_mcg(id);
        ASSERT_TRUE(run.result.succeeded()) << id;
        EXPECT_TRUE(note_detail(run.trace, "anchor not in memory").has_value());
        EXPECT_EQ(count_actions(run.trace, "fallback_start"), 1);
        EXPECT_EQ(run.result.costs.actions, 1 + kSweep + kOrbit) << id;
        EXPECT_GE(run.result.iou, 0.25) << id;
    }
}

TEST(AgentBranches, AbsentTargetEndsFailed)
{
    for (const auto& e: golden_episodes())
    {
        if (e.solvable)
            continue;
        const auto run = run_mcg(e.episode_id);
        EXPECT_EQ(run.result.final_phase, "failed") << e.episode_id;
        EXPECT_FALSE(run.result.failure_reason.empty());
        EXPECT_DOUBLE_EQ(run.result.iou, 0.0);
        EXPECT_EQ(run.trace.records().back()["phase"], "failed");
    }
}

// Trace and ledger consistency.

TEST(AgentTrace, CostDeltasSumToTheLedger)
{
    for (const auto& e: golden_episodes())
    {
        const auto run = run_mcg(e.episode_id);
        auto trans = 0.0, rot = 0.0;
        auto actions = 0;
        for (const auto& r: run.trace.records())
        {
            trans += r["cost_delta"]["trans_time"].get<double>();
            rot += r["cost_delta"]["rot_time"].get<double>();
            actions += r["event_type"] == "action" ? 1 : 0;
        }
        EXPECT_NEAR(trans, run.result.costs.trans_time, 1e-9) << e.episode_id;
        EXPECT_NEAR(rot, run.result.costs.rot_time, 1e-9) << e.episode_id;
        EXPECT_EQ(actions, run.result.costs.actions) << e.episode_id;
        EXPECT_NEAR(run.result.costs.motion_time, trans + rot, 1e-9);
    }
}

TEST(AgentTrace, ReplayingActionPosesReproducesCosts)
{
    for (const auto& e: golden_episodes())
    {
        const auto run = run_mcg(e.episode_id);
        auto poses = std::vector<Pose> { golden_suite().world(e).scenes->curr.standard_origin };
        for (const auto& p: run.trace.action_poses())
            poses.push_back(p);
        const auto replay = trajectory_cost(poses);
        EXPECT_EQ(replay.actions, run.result.costs.actions) << e.episode_id;
        EXPECT_NEAR(replay.trans_time, run.result.costs.trans_time, 1e-9) << e.episode_id;
        EXPECT_NEAR(replay.rot_time, run.result.costs.rot_time, 1e-9) << e.episode_id;
    }
}

TEST(AgentTrace, SweepPosesAreLevelBeforeTilt)
{
    // Every sweep camera keeps its image x axis horizontal.
    for (const auto* id: { "kitchen_support_new_anchor", "office_support_target_moved", "living_support_anchor_moved" })
    {
        const auto run = run_mcg(id);
        for (const auto& r: run.trace.records())
        {
            if (r["event_type"] != "action" || r["reason"] == "orbit")
                continue;
            const auto& m = r["pose"]["rotation_rowmajor"];
            // Second row, first column: the world-y component of the camera x axis.
            EXPECT_NEAR(m[3].get<double>(), 0.0, 1e-9) << id << " " << r["reason"];
        }
    }
}

// Ablations.

TEST(AgentAblation, WithoutMemoryEveryEpisodeCostsMore)
{
    auto off = BenchConfig {};
    off.agent.use_memory = false;
    auto total_on = 0, total_off = 0;
    for (const auto& e: golden_episodes())
    {
        const auto with = run_mcg(e.episode_id);
        const auto without = run_mcg(e.episode_id, off);
        total_on += with.result.costs.actions;
        total_off += without.result.costs.actions;
        if (e.solvable)
            EXPECT_GT(without.result.costs.actions, with.result.costs.actions) << e.episode_id;
    }
    EXPECT_GT(total_off, total_on);
}

TEST(AgentAblation, WithoutMultiviewIouNeverRises)
{
    auto off = BenchConfig {};
    off.agent.multiview_enabled = false;
    for (const auto& e: golden_episodes())
        EXPECT_LE(run_mcg(e.episode_id, off).result.iou, run_mcg(e.episode_id).result.iou + 1e-12) << e.episode_id;
}

TEST(AgentAblation, WithoutFallbackFallbackEpisodesFail)
{
    auto off = BenchConfig {};
    off.agent.fallback_enabled = false;
    for (const auto& e: golden_episodes())
    {
        const auto base = run_mcg(e.episode_id);
        const auto ablated = run_mcg(e.episode_id, off);
        const auto visited = phases(base.trace);
        const auto used_fallback = std::find(visited.begin(), visited.end(), "fallback") != visited.end();
        if (used_fallback)
        {
            EXPECT_EQ(ablated.result.final_phase, "failed") << e.episode_id;
            EXPECT_EQ(ablated.result.failure_reason, "fallback disabled") << e.episode_id;
        }
        else
            EXPECT_EQ(result_to_json(ablated.result).dump(), result_to_json(base.result).dump()) << e.episode_id;
        if (e.has_tag("fallback"))
            EXPECT_TRUE(used_fallback) << e.episode_id;
    }
}

// Backend substitutability.

TEST(AgentRemote, ServedOracleReproducesLocalRun)
{
    for (const auto* id: { "office_support_target_moved", "living_horizontal_new_anchor" })
    {
        const auto e = episode_named(id);
        const auto w = golden_suite().world(e);
        auto served = OracleBackend({}, ground_truth_of(e, *w.scenes));
        auto service = fixtures::MockService(served);

        auto config = BenchConfig {};
        config.remote.base_url = service.url();
        config.remote.timeout_s = 10.0;
        auto suite = Suite({ e }, kData, config);
        const auto remote = suite.run(Method::mcg, BackendKind::remote);
        const auto local = suite.run(Method::mcg, BackendKind::oracle);
        ASSERT_EQ(remote.size(), 1u);
        EXPECT_EQ(results_to_jsonl(remote), results_to_jsonl(local)) << id;
        EXPECT_GT(service.requests(), 0u);
    }
}

TEST(AgentRemote, UnreachableServiceIsReported)
{
    auto config = BenchConfig {};
    config.remote.base_url = "http://127.0.0.1:1";
    config.remote.timeout_s = 0.5;
    config.remote.retries = 0;
    auto suite = Suite({ episode_named("office_support_static") }, kData, config);
    EXPECT_ANY_THROW((void)suite.run(Method::mcg, BackendKind::remote));
}
