// SPDX-License-Identifier: Apache-2.0
#pragma once

// The memory-driven grounding agent: query classification, memory retrieval
// and grounding, fallback search and multi-view projection, with every pose
// change booked on a cost ledger and every decision written to a trace.

#include <memgrounder/costs.hpp>
#include <memgrounder/perception.hpp>
#include <memgrounder/policies.hpp>
#include <memgrounder/projection.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mg
{

enum class Phase
{
    classify,
    retrieve,
    verify,
    explore,
    fallback,
    multiview,
    done,
    failed,
};

[[nodiscard]] auto to_string(Phase p) -> std::string_view;

struct AgentConfig
{
    SpeedModel speeds;
    SweepSettings sweep;
    CandidateSettings candidate;
    FusionSettings fusion;
    CameraIntrinsics intrinsics = CameraIntrinsics::working();
    /// Detector boxes covering more than this fraction of the image are dropped.
    double oversize_box_fraction = 0.9;
    bool use_memory = true;
    bool fallback_enabled = true;
    bool multiview_enabled = true;

    void validate() const;
};

/// Machine-readable decision log, one JSON object per event.
class Trace
{
  public:
    void phase(Phase from, Phase to);
    void call(Phase phase, std::string_view method, std::optional<int> chosen_label,
              nlohmann::ordered_json detail = nlohmann::ordered_json::object());
    void batch(Phase phase, std::string_view policy, std::size_t count);
    void action(Phase phase, const Pose& pose, const CostDelta& delta, std::string_view reason);
    void note(Phase phase, std::string_view what, nlohmann::ordered_json detail = nlohmann::ordered_json::object());

    [[nodiscard]] auto records() const -> const std::vector<nlohmann::ordered_json>& { return _records; }
    /// Poses of every action event, in order.
    [[nodiscard]] auto action_poses() const -> std::vector<Pose>;
    [[nodiscard]] auto to_jsonl() const -> std::string;

  private:
    std::vector<nlohmann::ordered_json> _records;
};

/// Zero-volume box at the origin returned by failed episodes; scores IoU 0.
[[nodiscard]] auto failure_box() -> Box3D;

struct EpisodeState
{
    Phase phase = Phase::classify;
    const std::vector<MemoryFrame>* memory = nullptr;
    const SceneModel* current_scene = nullptr;
    const SceneModel* prev_scene = nullptr;
    CostLedger ledger { Pose {} };
    std::optional<Pose> anchor_pose;
    std::optional<RenderedFrame> target_frame;
    std::optional<PointCloud> reference_cloud;
    std::optional<Box3D> result;
};

struct EpisodeOutcome
{
    Box3D box = failure_box();
    Phase final_phase = Phase::failed;
    CostLedger ledger { Pose {} };
    Trace trace;
    /// AABB of the single-view reference cluster, when one was built.
    std::optional<Box3D> single_view_box;
    std::string failure_reason;

    [[nodiscard]] auto succeeded() const -> bool { return final_phase == Phase::done; }
};

/// Runs one grounding episode from the current scene's standard origin.
/// BackendError propagates; every other dead end ends in Phase::failed.
[[nodiscard]] auto run_episode(const GroundingQuery& query, const ScenePair& scenes,
                               const std::vector<MemoryFrame>& memory, PerceptionBackend& backend,
                               const AgentConfig& config = {}) -> EpisodeOutcome;

struct MultiviewResult
{
    std::optional<Box3D> box;
    std::optional<Box3D> single_view_box;
    std::optional<PointCloud> reference_cloud;
    std::size_t fused_candidates = 0;
    std::string failure_reason;
};

/// Boxes the target seen in `target_frame`: reference cloud, then (when
/// enabled) a 16-view orbit whose renders are booked on `ledger`, view
/// selection, candidate extraction and fusion.
[[nodiscard]] auto multiview_ground(const RenderedFrame& target_frame, const GroundingQuery& query,
                                    const SceneModel& scene, PerceptionBackend& backend, CostLedger& ledger,
                                    Trace& trace, const AgentConfig& config) -> MultiviewResult;

/// Visiting order of a pre-captured tour: start at the frame nearest
/// `start` (ties to the lower index), then wrap around.
[[nodiscard]] auto wandering_order(const std::vector<Pose>& tour, const Pose& start) -> std::vector<std::size_t>;

/// Renders every pose of a committed batch, in parallel.
[[nodiscard]] auto render_batch(const SceneModel& scene, const std::vector<Pose>& poses,
                                const CameraIntrinsics& intrinsics) -> std::vector<RenderedFrame>;

} // namespace mg
