// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark side: spatial-relation descriptions, episodes, the baselines,
// suite orchestration and accuracy/cost metrics.

#include <memgrounder/agent.hpp>
#include <memgrounder/oracle.hpp>
#include <memgrounder/remote.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mg
{

/// Geometric thresholds of the relation predicates, in meters unless noted.
struct RelationThresholds
{
    /// Largest gap between a supported object's bottom and its support's top.
    double contact = 0.05;
    /// Minimum horizontal footprint overlap, as a fraction of the target footprint.
    double overlap = 0.3;
    /// Minimum distance lead of a closest/farthest pick over the runner-up.
    double margin = 0.01;
    /// Open range of the target's position along the anchor segment.
    double between_lo = 0.1;
    double between_hi = 0.9;
    /// Largest lateral offset from the anchor segment.
    double corridor = 0.5;
    int max_distractors = 6;
    /// Largest target-anchor center distance of a description.
    double anchor_distance = 1.5;

    void validate() const;
};

struct RelationFact
{
    int target_id = 0;
    Relation relation = Relation::support;
    Qualifier qualifier = Qualifier::on;
    std::vector<int> anchor_ids;

    friend auto operator<=>(const RelationFact&, const RelationFact&) = default;
};

/// Every relation that holds between instances of `scene`, sorted.
[[nodiscard]] auto relation_predicates(const SceneModel& scene, const RelationThresholds& t = {})
    -> std::vector<RelationFact>;

/// Whether `fact` holds in `scene`. Superlatives are judged against every
/// other instance of the target's class.
[[nodiscard]] auto relation_holds(const SceneModel& scene, const RelationFact& fact, const RelationThresholds& t = {})
    -> bool;

enum class Uniqueness
{
    unique,
    multiple,
};

[[nodiscard]] auto to_string(Uniqueness u) -> std::string_view;

struct RelationDescription
{
    std::string text;
    GroundingQuery query;
    int target_instance_id = 0;
    std::vector<int> anchor_instance_ids;
    Uniqueness uniqueness = Uniqueness::unique;

    friend auto operator==(const RelationDescription&, const RelationDescription&) -> bool = default;
};

/// Descriptions of the current scene that single out their target, sorted
/// by text.
[[nodiscard]] auto generate_descriptions(const ScenePair& pair, const RelationThresholds& t = {})
    -> std::vector<RelationDescription>;

/// Instances of the described class that satisfy the description, with the
/// anchors resolved by class.
[[nodiscard]] auto resolve_description(const SceneModel& scene, const GroundingQuery& query,
                                       const RelationThresholds& t = {}) -> std::vector<int>;

[[nodiscard]] auto description_to_json(const RelationDescription& d) -> nlohmann::ordered_json;
/// One JSON object per line, terminated by a newline.
[[nodiscard]] auto descriptions_to_jsonl(const std::vector<RelationDescription>& ds) -> std::string;

/// One grounding task. Ids refer to the current scene, prev_* to the previous one.
struct Episode
{
    std::string episode_id;
    /// Scene-pair file, relative to the episode file's directory.
    std::string scene;
    GroundingQuery query;
    std::optional<int> target_id;
    std::vector<int> anchor_ids;
    std::optional<int> prev_target_id;
    std::vector<int> prev_anchor_ids;
    bool solvable = true;
    std::vector<std::string> tags;

    [[nodiscard]] auto has_tag(std::string_view tag) const -> bool;
};

[[nodiscard]] auto episode_to_json(const Episode& e) -> nlohmann::ordered_json;
/// Throws LoadError naming the offending field.
[[nodiscard]] auto episode_from_json(const nlohmann::json& j, const std::string& path = "episode") -> Episode;
[[nodiscard]] auto load_episodes(const std::filesystem::path& path) -> std::vector<Episode>;

enum class Method
{
    mcg,
    wg,
    crg,
    mog,
};

[[nodiscard]] auto to_string(Method m) -> std::string_view;
[[nodiscard]] auto parse_method(std::string_view s) -> std::optional<Method>;

enum class BackendKind
{
    oracle,
    remote,
};

/// Every tunable of a benchmark run.
struct BenchConfig
{
    AgentConfig agent;
    OracleConfig oracle;
    RemoteConfig remote;
    RelationThresholds relations;
    int stitch_budget = 6;
    /// Central-rotation sweep: 18 steps of 20 degrees by default.
    int crg_steps = 18;
    double crg_step_deg = 20.0;
    int workers = 4;

    void validate() const;
};

/// Flat key-value document; unknown keys and wrong types are LoadErrors.
[[nodiscard]] auto parse_bench_config(const nlohmann::json& doc) -> BenchConfig;
[[nodiscard]] auto load_bench_config(const std::filesystem::path& path) -> BenchConfig;
[[nodiscard]] auto bench_config_to_json(const BenchConfig& c) -> nlohmann::ordered_json;

struct EpisodeResult
{
    std::string episode_id;
    Method method = Method::mcg;
    Box3D box = failure_box();
    double iou = 0.0;
    CostSummary costs;
    Uniqueness uniqueness = Uniqueness::unique;
    bool solvable = true;
    std::string final_phase;
    std::string failure_reason;
    std::string trace_path;
    /// AABB of the single-view reference cloud, when one was built.
    std::optional<Box3D> single_view_box;

    [[nodiscard]] auto succeeded() const -> bool { return final_phase == "done"; }
};

[[nodiscard]] auto result_to_json(const EpisodeResult& r) -> nlohmann::ordered_json;
[[nodiscard]] auto result_from_json(const nlohmann::json& j, const std::string& path = "result") -> EpisodeResult;
[[nodiscard]] auto load_results(const std::filesystem::path& path) -> std::vector<EpisodeResult>;

struct MethodRun
{
    EpisodeResult result;
    Trace trace;
};

/// Scenes and memory an episode runs on.
struct EpisodeWorld
{
    const ScenePair* scenes = nullptr;
    const std::vector<MemoryFrame>* memory = nullptr;
};

/// Ground truth the oracle needs for an episode.
[[nodiscard]] auto ground_truth_of(const Episode& e, const ScenePair& scenes) -> GroundTruth;

/// Runs one method on one episode with the given backend.
[[nodiscard]] auto run_method(Method method, const Episode& episode, const EpisodeWorld& world,
                              PerceptionBackend& backend, const BenchConfig& config) -> MethodRun;

/// Tour walk of the current scene, then image choice and multiview.
[[nodiscard]] auto baseline_wandering(const Episode& episode, const EpisodeWorld& world, PerceptionBackend& backend,
                                      const BenchConfig& config) -> MethodRun;
/// Rotation sweep at the standard origin, then image choice and multiview.
[[nodiscard]] auto baseline_central_rotation(const Episode& episode, const EpisodeWorld& world,
                                             PerceptionBackend& backend, const BenchConfig& config) -> MethodRun;
/// Single-view grounding on memory frames only; no motion is booked.
[[nodiscard]] auto baseline_memory_only(const Episode& episode, const EpisodeWorld& world,
                                        PerceptionBackend& backend, const BenchConfig& config) -> MethodRun;

/// Loads scene pairs once and runs episodes on a worker pool.
class Suite
{
  public:
    Suite(std::vector<Episode> episodes, std::filesystem::path base_dir, BenchConfig config);

    [[nodiscard]] auto episodes() const -> const std::vector<Episode>& { return _episodes; }
    [[nodiscard]] auto world(const Episode& e) -> EpisodeWorld;

    /// Results in episode order. Traces go to trace_dir/<episode>.<method>.jsonl
    /// when a directory is given.
    auto run(Method method, BackendKind backend, const std::optional<std::filesystem::path>& trace_dir = {})
        -> std::vector<EpisodeResult>;

  private:
    struct World
    {
        ScenePair scenes;
        std::vector<MemoryFrame> memory;
    };

    auto world_for(const std::string& scene) -> const World&;

    std::vector<Episode> _episodes;
    std::filesystem::path _base_dir;
    BenchConfig _config;
    std::map<std::string, World> _worlds;
};

[[nodiscard]] auto results_to_jsonl(const std::vector<EpisodeResult>& results) -> std::string;

struct Accuracy
{
    std::size_t count = 0;
    double acc25 = 0.0;
    double acc50 = 0.0;
};

struct MethodSummary
{
    Method method = Method::mcg;
    Accuracy overall;
    /// Absent when the split has no samples.
    std::optional<Accuracy> unique;
    std::optional<Accuracy> multiple;
    double mean_actions = 0.0;
    /// Mean times in kilo-seconds.
    double mean_trans_ks = 0.0;
    double mean_rot_ks = 0.0;
    double mean_motion_ks = 0.0;
};

/// Per-method summary, in method order. Throws EmptyInput on no results.
[[nodiscard]] auto evaluate(const std::vector<EpisodeResult>& results) -> std::vector<MethodSummary>;
[[nodiscard]] auto summary_table(const std::vector<MethodSummary>& s) -> std::string;
[[nodiscard]] auto summary_markdown(const std::vector<MethodSummary>& s) -> std::string;

} // namespace mg
