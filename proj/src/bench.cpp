// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/bench.hpp>
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace mg
{

using nlohmann::json;
using nlohmann::ordered_json;

auto Episode::has_tag(std::string_view tag) const -> bool
{
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

namespace
{
    auto need(const json& j, const std::string& path, const char* key) -> const json&
    {
        if (!j.is_object())
            throw LoadError(path, "expected an object");
        const auto it = j.find(key);
        if (it == j.end())
            throw LoadError(path + "." + key, "missing");
        return *it;
    }

    template <class T>
    auto typed(const json& j, const std::string& path) -> T
    {
        try
        {
            return j.get<T>();
        }
        catch (const json::exception&)
        {
            throw LoadError(path, "wrong type");
        }
    }

    auto optional_id(const json& j, const std::string& path) -> std::optional<int>
    {
        if (j.is_null())
            return std::nullopt;
        if (!j.is_number_integer())
            throw LoadError(path, "expected an integer or null");
        return j.get<int>();
    }

    auto id_json(const std::optional<int>& id) -> ordered_json { return id ? ordered_json(*id) : ordered_json(nullptr); }

    auto box_ordered(const Box3D& b) -> ordered_json
    {
        return { { "center", { b.center.x(), b.center.y(), b.center.z() } },
                 { "half_extents", { b.half_extents.x(), b.half_extents.y(), b.half_extents.z() } } };
    }

    auto box_from(const json& j, const std::string& path) -> Box3D
    {
        const auto c = typed<std::vector<double>>(need(j, path, "center"), path + ".center");
        const auto h = typed<std::vector<double>>(need(j, path, "half_extents"), path + ".half_extents");
        if (c.size() != 3 || h.size() != 3)
            throw LoadError(path, "expected three components");
        return { Vec3(c[0], c[1], c[2]), Vec3(h[0], h[1], h[2]), Mat3::Identity() };
    }

    auto read_lines(const std::filesystem::path& path) -> std::vector<std::pair<std::size_t, json>>
    {
        auto in = std::istringstream(read_text_file(path));
        auto out = std::vector<std::pair<std::size_t, json>> {};
        auto line = std::string {};
        for (std::size_t n = 1; std::getline(in, line); ++n)
        {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw LoadError(path.string() + ":" + std::to_string(n), "not valid JSON");
            out.emplace_back(n, std::move(j));
        }
        return out;
    }

    /// Builds a query from its structured fields and checks the text.
    auto query_from(const json& j, const std::string& path) -> GroundingQuery
    {
        auto q = GroundingQuery {};
        q.raw_text = typed<std::string>(need(j, path, "text"), path + ".text");
        q.target_class = typed<std::string>(need(j, path, "target_class"), path + ".target_class");
        const auto relation = parse_relation_name(typed<std::string>(need(j, path, "relation"), path + ".relation"));
        const auto qualifier =
            parse_qualifier_name(typed<std::string>(need(j, path, "qualifier"), path + ".qualifier"));
        if (!relation)
            throw LoadError(path + ".relation", "unknown relation");
        if (!qualifier)
            throw LoadError(path + ".qualifier", "unknown qualifier");
        q.relation = *relation;
        q.qualifier = *qualifier;
        q.anchor_classes =
            typed<std::vector<std::string>>(need(j, path, "anchor_classes"), path + ".anchor_classes");
        q.verifiability = verifiability_of(q.relation);
        try
        {
            q.validate();
        }
        catch (const InvalidArgument& e)
        {
            throw LoadError(path, e.what());
        }
        if (q.raw_text != describe(q))
            throw LoadError(path + ".text", "text does not match the structured query");
        return q;
    }
} // namespace

auto to_string(Method m) -> std::string_view
{
    switch (m)
    {
        case Method::mcg: return "mcg";
        case Method::wg: return "wg";
        case Method::crg: return "crg";
        case Method::mog: return "mog";
    }
    return "unknown";
}

auto parse_method(std::string_view s) -> std::optional<Method>
{
    for (const auto m: { Method::mcg, Method::wg, Method::crg, Method::mog })
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

auto episode_to_json(const Episode& e) -> ordered_json
{
    auto j = ordered_json::object();
    j["episode_id"] = e.episode_id;
    j["scene"] = e.scene;
    j["query"] = { { "text", e.query.raw_text },
                   { "target_class", e.query.target_class },
                   { "relation", to_string(e.query.relation) },
                   { "qualifier", to_string(e.query.qualifier) },
                   { "anchor_classes", e.query.anchor_classes } };
    j["target_id"] = id_json(e.target_id);
    j["anchor_ids"] = e.anchor_ids;
    j["prev_target_id"] = id_json(e.prev_target_id);
    j["prev_anchor_ids"] = e.prev_anchor_ids;
    j["solvable"] = e.solvable;
    j["tags"] = e.tags;
    return j;
}

auto episode_from_json(const json& j, const std::string& path) -> Episode
{
    auto e = Episode {};
    e.episode_id = typed<std::string>(need(j, path, "episode_id"), path + ".episode_id");
    e.scene = typed<std::string>(need(j, path, "scene"), path + ".scene");
    e.query = query_from(need(j, path, "query"), path + ".query");
    e.target_id = optional_id(need(j, path, "target_id"), path + ".target_id");
    e.anchor_ids = typed<std::vector<int>>(need(j, path, "anchor_ids"), path + ".anchor_ids");
    e.prev_target_id = optional_id(need(j, path, "prev_target_id"), path + ".prev_target_id");
    e.prev_anchor_ids = typed<std::vector<int>>(need(j, path, "prev_anchor_ids"), path + ".prev_anchor_ids");
    e.solvable = typed<bool>(need(j, path, "solvable"), path + ".solvable");
    if (const auto it = j.find("tags"); it != j.end())
        e.tags = typed<std::vector<std::string>>(*it, path + ".tags");
    if (e.solvable && !e.target_id)
        throw LoadError(path + ".target_id", "a solvable episode needs a target");
    return e;
}

auto load_episodes(const std::filesystem::path& path) -> std::vector<Episode>
{
    auto out = std::vector<Episode> {};
    auto ids = std::set<std::string> {};
    for (const auto& [line, j]: read_lines(path))
    {
        out.push_back(episode_from_json(j, path.string() + ":" + std::to_string(line)));
        if (!ids.insert(out.back().episode_id).second)
            throw LoadError(path.string() + ":" + std::to_string(line), "duplicate episode_id");
    }
    return out;
}

auto result_to_json(const EpisodeResult& r) -> ordered_json
{
    auto j = ordered_json::object();
    j["episode_id"] = r.episode_id;
    j["method"] = to_string(r.method);
    j["box"] = box_ordered(r.box);
    j["iou"] = r.iou;
    j["costs"] = { { "actions", r.costs.actions },
                   { "trans_time", r.costs.trans_time },
                   { "rot_time", r.costs.rot_time },
                   { "motion_time", r.costs.motion_time } };
    j["uniqueness"] = to_string(r.uniqueness);
    j["solvable"] = r.solvable;
    j["final_phase"] = r.final_phase;
    j["failure_reason"] = r.failure_reason;
    j["trace_path"] = r.trace_path;
    j["single_view_box"] = r.single_view_box ? box_ordered(*r.single_view_box) : ordered_json(nullptr);
    return j;
}

auto result_from_json(const json& j, const std::string& path) -> EpisodeResult
{
    auto r = EpisodeResult {};
    r.episode_id = typed<std::string>(need(j, path, "episode_id"), path + ".episode_id");
    const auto method = parse_method(typed<std::string>(need(j, path, "method"), path + ".method"));
    if (!method)
        throw LoadError(path + ".method", "unknown method");
    r.method = *method;
    r.box = box_from(need(j, path, "box"), path + ".box");
    r.iou = typed<double>(need(j, path, "iou"), path + ".iou");
    if (!(r.iou >= 0.0 && r.iou <= 1.0))
        throw LoadError(path + ".iou", "must lie in [0, 1]");
    const auto& costs = need(j, path, "costs");
    r.costs.actions = typed<int>(need(costs, path + ".costs", "actions"), path + ".costs.actions");
    r.costs.trans_time = typed<double>(need(costs, path + ".costs", "trans_time"), path + ".costs.trans_time");
    r.costs.rot_time = typed<double>(need(costs, path + ".costs", "rot_time"), path + ".costs.rot_time");
    r.costs.motion_time = typed<double>(need(costs, path + ".costs", "motion_time"), path + ".costs.motion_time");
    const auto uniqueness = typed<std::string>(need(j, path, "uniqueness"), path + ".uniqueness");
    if (uniqueness != "unique" && uniqueness != "multiple")
        throw LoadError(path + ".uniqueness", "expected unique or multiple");
    r.uniqueness = uniqueness == "unique" ? Uniqueness::unique : Uniqueness::multiple;
    r.solvable = typed<bool>(need(j, path, "solvable"), path + ".solvable");
    r.final_phase = typed<std::string>(need(j, path, "final_phase"), path + ".final_phase");
    r.failure_reason = typed<std::string>(need(j, path, "failure_reason"), path + ".failure_reason");
    r.trace_path = typed<std::string>(need(j, path, "trace_path"), path + ".trace_path");
    if (const auto it = j.find("single_view_box"); it != j.end() && !it->is_null())
        r.single_view_box = box_from(*it, path + ".single_view_box");
    return r;
}

auto load_results(const std::filesystem::path& path) -> std::vector<EpisodeResult>
{
    auto out = std::vector<EpisodeResult> {};
    for (const auto& [line, j]: read_lines(path))
        out.push_back(result_from_json(j, path.string() + ":" + std::to_string(line)));
    return out;
}

auto results_to_jsonl(const std::vector<EpisodeResult>& results) -> std::string
{
    auto out = std::string {};
    for (const auto& r: results)
        out += result_to_json(r).dump() + "\n";
    return out;
}

auto ground_truth_of(const Episode& e, const ScenePair& scenes) -> GroundTruth
{
    return { &scenes, { e.prev_target_id, e.prev_anchor_ids }, { e.target_id, e.anchor_ids } };
}

namespace
{
    auto score(const Episode& episode, const ScenePair& scenes, Method method, const Box3D& box) -> EpisodeResult
    {
        auto r = EpisodeResult {};
        r.episode_id = episode.episode_id;
        r.method = method;
        r.box = box;
        r.solvable = episode.solvable;
        r.uniqueness = scenes.curr.count_of(episode.query.target_class) <= 1 ? Uniqueness::unique
                                                                             : Uniqueness::multiple;
        if (episode.target_id)
        {
            const auto* target = scenes.curr.find(*episode.target_id);
            if (target == nullptr)
                throw InvalidFixture("episode " + episode.episode_id + ": target id " +
                                     std::to_string(*episode.target_id) + " is not in the current scene");
            if (box.volume() > 0.0)
                r.iou = std::clamp(iou3d_aabb(box, target->box.world_aabb()), 0.0, 1.0);
        }
        return r;
    }

    auto from_outcome(const Episode& episode, const ScenePair& scenes, Method method, EpisodeOutcome outcome)
        -> MethodRun
    {
        auto run = MethodRun { score(episode, scenes, method, outcome.box), std::move(outcome.trace) };
        run.result.costs = outcome.ledger.summary();
        run.result.final_phase = std::string(to_string(outcome.final_phase));
        run.result.failure_reason = outcome.failure_reason;
        run.result.single_view_box = outcome.single_view_box;
        return run;
    }

    auto labeled(const std::vector<RenderedFrame>& frames) -> std::vector<LabeledFrame>
    {
        auto out = std::vector<LabeledFrame> {};
        for (std::size_t i = 0; i < frames.size(); ++i)
            out.push_back({ static_cast<int>(i), &frames[i] });
        return out;
    }
} // namespace

auto baseline_wandering(const Episode& episode, const EpisodeWorld& world, PerceptionBackend& backend,
                        const BenchConfig& config) -> MethodRun
{
    if (world.scenes->curr.tour.empty())
        throw InvalidFixture("episode " + episode.episode_id + ": the current scene has no tour");
    // The memory-free agent walks the current scene's tour from the start pose.
    auto agent = config.agent;
    agent.use_memory = false;
    return from_outcome(episode, *world.scenes, Method::wg,
                        run_episode(episode.query, *world.scenes, *world.memory, backend, agent));
}

auto baseline_central_rotation(const Episode& episode, const EpisodeWorld& world, PerceptionBackend& backend,
                               const BenchConfig& config) -> MethodRun
{
    const auto& scene = world.scenes->curr;
    auto outcome = EpisodeOutcome {};
    auto ledger = CostLedger(scene.standard_origin, config.agent.speeds);
    auto& trace = outcome.trace;
    trace.note(Phase::explore, "start", { { "query", episode.query.raw_text } });

    auto sweep = config.agent.sweep;
    sweep.oss_count = config.crg_steps;
    sweep.oss_step_deg = config.crg_step_deg;
    const auto ring = oss_poses(scene.standard_origin, sweep);
    trace.batch(Phase::explore, "central_rotation", ring.size());
    const auto frames = render_batch(scene, ring.poses, config.agent.intrinsics);
    for (const auto& p: ring.poses)
        trace.action(Phase::explore, p, ledger.record_action(p), "central_rotation");

    const auto offered = labeled(frames);
    const auto pick = backend.choose_image(offered, episode.query, ImageRole::find_target);
    trace.call(Phase::explore, "choose_image", pick, { { "role", "find_target" }, { "offered", offered.size() } });
    outcome.final_phase = Phase::failed;
    if (!pick)
        outcome.failure_reason = "target not seen from the origin";
    else
    {
        trace.phase(Phase::explore, Phase::multiview);
        auto mv = multiview_ground(frames.at(static_cast<std::size_t>(*pick)), episode.query, scene, backend, ledger,
                                   trace, config.agent);
        outcome.single_view_box = mv.single_view_box;
        if (mv.box)
        {
            outcome.box = *mv.box;
            outcome.final_phase = Phase::done;
        }
        else
            outcome.failure_reason = mv.failure_reason;
    }
    trace.phase(Phase::multiview, outcome.final_phase);
    outcome.ledger = ledger;
    return from_outcome(episode, *world.scenes, Method::crg, std::move(outcome));
}

auto baseline_memory_only(const Episode& episode, const EpisodeWorld& world, PerceptionBackend& backend,
                          const BenchConfig& config) -> MethodRun
{
    const auto& scene = world.scenes->curr;
    auto outcome = EpisodeOutcome {};
    outcome.ledger = CostLedger(scene.standard_origin, config.agent.speeds);
    auto& trace = outcome.trace;
    constexpr auto phase = Phase::retrieve;
    trace.note(phase, "start", { { "query", episode.query.raw_text } });
    outcome.final_phase = Phase::failed;

    const auto finish = [&](std::string reason) {
        outcome.failure_reason = std::move(reason);
        trace.note(phase, "failure", { { "reason", outcome.failure_reason } });
        return from_outcome(episode, *world.scenes, Method::mog, std::move(outcome));
    };

    auto offered = std::vector<LabeledFrame> {};
    for (const auto& m: *world.memory)
        if (!backend.detect_class(m.frame, episode.query.target_class).empty())
            offered.push_back({ m.frame_id, &m.frame });
    trace.call(phase, "detect_class", std::nullopt,
               { { "class", episode.query.target_class }, { "hits", offered.size() } });
    if (offered.empty())
        return finish("target class not in memory");
    const auto pick = backend.choose_image(offered, episode.query, ImageRole::find_target);
    trace.call(phase, "choose_image", pick, { { "role", "find_target" }, { "offered", offered.size() } });
    if (!pick)
        return finish("no memory frame shows the target");
    const auto& memory = *std::find_if(offered.begin(), offered.end(), [&](const auto& f) { return f.label == *pick; })
                              ->frame;

    auto proposals = std::vector<Box2D> {};
    const auto image_area = static_cast<double>(memory.intrinsics.pixel_count());
    for (const auto& b: backend.detect_class(memory, episode.query.target_class))
        if (static_cast<double>(b.area()) <= config.agent.oversize_box_fraction * image_area)
            proposals.push_back(b);
    const auto chosen = backend.choose_box(memory, proposals, episode.query);
    trace.call(phase, "choose_box", chosen ? std::optional<int>(static_cast<int>(*chosen)) : std::nullopt);
    if (!chosen)
        return finish("no target box in the memory frame");
    const auto mask = backend.segment(memory, proposals[*chosen]);
    trace.call(phase, "segment", std::nullopt, { { "pixels", mask.count() } });

    // Depth comes from the current scene seen from the remembered pose; no motion is booked.
    const auto now = render(scene, memory.pose, config.agent.intrinsics);
    const auto clean = denoise_depth_mask(now, mask, config.agent.candidate.mad_k, config.agent.candidate.mad_floor);
    if (!clean)
        return finish("mask empty after denoising");
    auto fusion = config.agent.fusion;
    fusion.debug_dir.reset();
    const auto box = fuse_and_box(mask_to_cloud(now, *clean, 0), {}, fusion);
    outcome.box = box;
    outcome.single_view_box = box;
    outcome.final_phase = Phase::done;
    trace.phase(phase, Phase::done);
    return from_outcome(episode, *world.scenes, Method::mog, std::move(outcome));
}

auto run_method(Method method, const Episode& episode, const EpisodeWorld& world, PerceptionBackend& backend,
                const BenchConfig& config) -> MethodRun
{
    switch (method)
    {
        case Method::mcg:
            return from_outcome(episode, *world.scenes, Method::mcg,
                                run_episode(episode.query, *world.scenes, *world.memory, backend, config.agent));
        case Method::wg: return baseline_wandering(episode, world, backend, config);
        case Method::crg: return baseline_central_rotation(episode, world, backend, config);
        case Method::mog: return baseline_memory_only(episode, world, backend, config);
    }
    throw InvalidArgument("run_method: unknown method");
}

Suite::Suite(std::vector<Episode> episodes, std::filesystem::path base_dir, BenchConfig config):
    _episodes(std::move(episodes)), _base_dir(std::move(base_dir)), _config(std::move(config))
{
    _config.validate();
    for (const auto& e: _episodes)
        (void)world_for(e.scene);
}

auto Suite::world_for(const std::string& scene) -> const World&
{
    if (const auto it = _worlds.find(scene); it != _worlds.end())
        return it->second;
    auto w = World {};
    w.scenes = load_scene_pair(_base_dir / scene);
    w.memory = capture_memory(w.scenes.prev, _config.agent.intrinsics);
    return _worlds.emplace(scene, std::move(w)).first->second;
}

auto Suite::world(const Episode& e) -> EpisodeWorld
{
    const auto& w = world_for(e.scene);
    return { &w.scenes, &w.memory };
}

auto Suite::run(Method method, BackendKind backend_kind, const std::optional<std::filesystem::path>& trace_dir)
    -> std::vector<EpisodeResult>
{
    if (trace_dir)
        std::filesystem::create_directories(*trace_dir);
    auto remote = std::unique_ptr<RemoteBackend> {};
    if (backend_kind == BackendKind::remote)
        remote = std::make_unique<RemoteBackend>(_config.remote, PromptTemplates::defaults(), _config.stitch_budget);

    // Worlds are all loaded by the constructor, so workers only read them.
    auto results = std::vector<EpisodeResult>(_episodes.size());
    auto errors = std::vector<std::exception_ptr>(_episodes.size());
    auto next = std::atomic<std::size_t> { 0 };
    const auto work = [&] {
        for (auto i = next++; i < _episodes.size(); i = next++)
        {
            try
            {
                const auto& e = _episodes[i];
                const auto w = world(e);
                auto oracle = std::unique_ptr<OracleBackend> {};
                PerceptionBackend* backend = remote.get();
                if (!backend)
                {
                    oracle = std::make_unique<OracleBackend>(_config.oracle, ground_truth_of(e, *w.scenes),
                                                             _config.stitch_budget);
                    backend = oracle.get();
                }
                auto run = run_method(method, e, w, *backend, _config);
                if (trace_dir)
                {
                    const auto file = *trace_dir / (e.episode_id + "." + std::string(to_string(method)) + ".jsonl");
                    auto out = std::ofstream(file, std::ios::binary);
                    out << run.trace.to_jsonl();
                    if (!out)
                        throw LoadError(file.string(), "cannot write trace");
                    run.result.trace_path = file.filename().string();
                }
                results[i] = std::move(run.result);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(_config.workers), _episodes.size());
    auto pool = std::vector<std::thread> {};
    for (std::size_t t = 1; t < n; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t: pool)
        t.join();
    for (const auto& e: errors)
        if (e)
            std::rethrow_exception(e);
    return results;
}

namespace
{
    auto accuracy_of(const std::vector<const EpisodeResult*>& rs) -> Accuracy
    {
        auto a = Accuracy { rs.size(), 0.0, 0.0 };
        for (const auto* r: rs)
        {
            a.acc25 += r->iou >= 0.25 ? 1.0 : 0.0;
            a.acc50 += r->iou >= 0.5 ? 1.0 : 0.0;
        }
        a.acc25 = 100.0 * a.acc25 / static_cast<double>(rs.size());
        a.acc50 = 100.0 * a.acc50 / static_cast<double>(rs.size());
        return a;
    }

    auto fixed(double v, int digits) -> std::string
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", digits, v);
        return buf;
    }

    auto split_cells(const std::optional<Accuracy>& a) -> std::pair<std::string, std::string>
    {
        if (!a)
            return { "-", "-" };
        return { fixed(a->acc25, 1), fixed(a->acc50, 1) };
    }

    auto rows_of(const std::vector<MethodSummary>& s) -> std::vector<std::vector<std::string>>
    {
        auto rows = std::vector<std::vector<std::string>> {
            { "method", "n", "acc@0.25", "acc@0.5", "uniq@0.25", "uniq@0.5", "mult@0.25", "mult@0.5", "C_a",
              "C_trans(ks)", "C_rot(ks)", "C_m(ks)" },
        };
        for (const auto& m: s)
        {
            const auto [u25, u50] = split_cells(m.unique);
            const auto [m25, m50] = split_cells(m.multiple);
            rows.push_back({ std::string(to_string(m.method)), std::to_string(m.overall.count),
                             fixed(m.overall.acc25, 1), fixed(m.overall.acc50, 1), u25, u50, m25, m50,
                             fixed(m.mean_actions, 2), fixed(m.mean_trans_ks, 4), fixed(m.mean_rot_ks, 4),
                             fixed(m.mean_motion_ks, 4) });
        }
        return rows;
    }
} // namespace

auto evaluate(const std::vector<EpisodeResult>& results) -> std::vector<MethodSummary>
{
    if (results.empty())
        throw EmptyInput("evaluate: no results");
    auto out = std::vector<MethodSummary> {};
    for (const auto method: { Method::mcg, Method::wg, Method::crg, Method::mog })
    {
        auto all = std::vector<const EpisodeResult*> {};
        auto unique = std::vector<const EpisodeResult*> {};
        auto multiple = std::vector<const EpisodeResult*> {};
        for (const auto& r: results)
        {
            if (r.method != method)
                continue;
            all.push_back(&r);
            (r.uniqueness == Uniqueness::unique ? unique : multiple).push_back(&r);
        }
        if (all.empty())
            continue;
        auto s = MethodSummary {};
        s.method = method;
        s.overall = accuracy_of(all);
        if (!unique.empty())
            s.unique = accuracy_of(unique);
        if (!multiple.empty())
            s.multiple = accuracy_of(multiple);
        // Sum in episode-id order so the means do not depend on result order.
        std::sort(all.begin(), all.end(), [](const auto* a, const auto* b) { return a->episode_id < b->episode_id; });
        for (const auto* r: all)
        {
            s.mean_actions += r->costs.actions;
            s.mean_trans_ks += r->costs.trans_time / 1000.0;
            s.mean_rot_ks += r->costs.rot_time / 1000.0;
            s.mean_motion_ks += r->costs.motion_time / 1000.0;
        }
        const auto n = static_cast<double>(all.size());
        s.mean_actions /= n;
        s.mean_trans_ks /= n;
        s.mean_rot_ks /= n;
        s.mean_motion_ks /= n;
        out.push_back(s);
    }
    return out;
}

auto summary_table(const std::vector<MethodSummary>& s) -> std::string
{
    const auto rows = rows_of(s);
    auto widths = std::vector<std::size_t>(rows.front().size(), 0);
    for (const auto& row: rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    auto out = std::string {};
    for (const auto& row: rows)
    {
        for (std::size_t c = 0; c < row.size(); ++c)
        {
            const auto pad = std::string(widths[c] - row[c].size(), ' ');
            out += c == 0 ? row[c] + pad : "  " + pad + row[c];
        }
        out += "\n";
    }
    return out;
}

auto summary_markdown(const std::vector<MethodSummary>& s) -> std::string
{
    const auto rows = rows_of(s);
    auto out = std::string {};
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        out += "|";
        for (const auto& cell: rows[r])
            out += " " + cell + " |";
        out += "\n";
        if (r == 0)
        {
            out += "|";
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                out += c == 0 ? " --- |" : " ---: |";
            out += "\n";
        }
    }
    return out;
}

} // namespace mg
