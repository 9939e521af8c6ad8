// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/agent.hpp>
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>

#include <algorithm>
#include <future>
#include <limits>
#include <sstream>

namespace mg
{

auto to_string(Phase p) -> std::string_view
{
    switch (p)
    {
        case Phase::classify: return "classify";
        case Phase::retrieve: return "retrieve";
        case Phase::verify: return "verify";
        case Phase::explore: return "explore";
        case Phase::fallback: return "fallback";
        case Phase::multiview: return "multiview";
        case Phase::done: return "done";
        case Phase::failed: return "failed";
    }
    return "unknown";
}

void AgentConfig::validate() const
{
    speeds.validate();
    intrinsics.validate();
    if (!(oversize_box_fraction > 0.0 && oversize_box_fraction <= 1.0))
        throw InvalidArgument("AgentConfig: oversize_box_fraction must lie in (0, 1]");
    if (!(fusion.voxel > 0.0) || !(fusion.volume_ratio >= 1.0))
        throw InvalidArgument("AgentConfig: fusion voxel must be positive and volume ratio at least 1");
    if (!(candidate.limit > 0.0) || !(candidate.mad_k > 0.0))
        throw InvalidArgument("AgentConfig: candidate limit and MAD gate must be positive");
    if (sweep.oss_count <= 0 || sweep.horizontal_count <= 0 || sweep.orbit_count <= 0)
        throw InvalidArgument("AgentConfig: sweep counts must be positive");
}

namespace
{
    auto record(std::string_view type, Phase phase) -> nlohmann::ordered_json
    {
        auto j = nlohmann::ordered_json::object();
        j["event_type"] = type;
        j["phase"] = to_string(phase);
        return j;
    }

    auto delta_json(const CostDelta& d) -> nlohmann::ordered_json
    {
        return { { "trans_time", d.trans_time }, { "rot_time", d.rot_time } };
    }
} // namespace

void Trace::phase(Phase from, Phase to)
{
    auto j = record("phase", to);
    j["from"] = to_string(from);
    j["cost_delta"] = delta_json({});
    _records.push_back(std::move(j));
}

void Trace::call(Phase phase, std::string_view method, std::optional<int> chosen_label,
                 nlohmann::ordered_json detail)
{
    auto j = record("backend_call", phase);
    j["backend_method"] = method;
    j["chosen_label"] = chosen_label ? nlohmann::ordered_json(*chosen_label) : nlohmann::ordered_json(nullptr);
    if (!detail.empty())
        j["detail"] = std::move(detail);
    j["cost_delta"] = delta_json({});
    _records.push_back(std::move(j));
}

void Trace::batch(Phase phase, std::string_view policy, std::size_t count)
{
    auto j = record("pose_batch", phase);
    j["policy"] = policy;
    j["count"] = count;
    j["cost_delta"] = delta_json({});
    _records.push_back(std::move(j));
}

void Trace::action(Phase phase, const Pose& pose, const CostDelta& delta, std::string_view reason)
{
    auto j = record("action", phase);
    j["reason"] = reason;
    j["pose"] = pose_to_json(pose);
    j["cost_delta"] = delta_json(delta);
    _records.push_back(std::move(j));
}

void Trace::note(Phase phase, std::string_view what, nlohmann::ordered_json detail)
{
    auto j = record("note", phase);
    j["what"] = what;
    if (!detail.empty())
        j["detail"] = std::move(detail);
    j["cost_delta"] = delta_json({});
    _records.push_back(std::move(j));
}

auto Trace::action_poses() const -> std::vector<Pose>
{
    auto out = std::vector<Pose> {};
    for (const auto& r: _records)
        if (r["event_type"] == "action")
            out.push_back(pose_from_json(nlohmann::json::parse(r["pose"].dump())));
    return out;
}

auto Trace::to_jsonl() const -> std::string
{
    auto out = std::string {};
    for (const auto& r: _records)
        out += r.dump() + "\n";
    return out;
}

auto failure_box() -> Box3D
{
    return Box3D { Vec3::Zero(), Vec3::Zero(), Mat3::Identity() };
}

auto wandering_order(const std::vector<Pose>& tour, const Pose& start) -> std::vector<std::size_t>
{
    if (tour.empty())
        throw InvalidFixture("wandering tour is empty");
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tour.size(); ++i)
        if (const auto d = (tour[i].translation - start.translation).norm(); d < best)
        {
            best = d;
            nearest = i;
        }
    auto order = std::vector<std::size_t> {};
    for (std::size_t i = 0; i < tour.size(); ++i)
        order.push_back((nearest + i) % tour.size());
    return order;
}

auto render_batch(const SceneModel& scene, const std::vector<Pose>& poses, const CameraIntrinsics& intrinsics)
    -> std::vector<RenderedFrame>
{
    auto jobs = std::vector<std::future<RenderedFrame>> {};
    for (const auto& p: poses)
        jobs.push_back(std::async(std::launch::async, [&scene, &intrinsics, p] { return render(scene, p, intrinsics); }));
    auto frames = std::vector<RenderedFrame> {};
    for (auto& j: jobs)
        frames.push_back(j.get());
    return frames;
}

namespace
{
    auto labeled(const std::vector<RenderedFrame>& frames) -> std::vector<LabeledFrame>
    {
        auto out = std::vector<LabeledFrame> {};
        for (std::size_t i = 0; i < frames.size(); ++i)
            out.push_back({ static_cast<int>(i), &frames[i] });
        return out;
    }

    auto box_json(const Box2D& b) -> nlohmann::ordered_json
    {
        return nlohmann::ordered_json::array({ b.u0, b.v0, b.u1, b.v1 });
    }
} // namespace

auto multiview_ground(const RenderedFrame& target_frame, const GroundingQuery& query, const SceneModel& scene,
                      PerceptionBackend& backend, CostLedger& ledger, Trace& trace, const AgentConfig& config)
    -> MultiviewResult
{
    constexpr auto phase = Phase::multiview;
    auto out = MultiviewResult {};
    const auto image_area = static_cast<double>(target_frame.intrinsics.pixel_count());

    auto proposals = std::vector<Box2D> {};
    for (const auto& b: backend.detect_class(target_frame, query.target_class))
        if (static_cast<double>(b.area()) <= config.oversize_box_fraction * image_area)
            proposals.push_back(b);
    trace.call(phase, "detect_class", std::nullopt, { { "boxes", proposals.size() } });

    const auto chosen = backend.choose_box(target_frame, proposals, query);
    trace.call(phase, "choose_box", chosen ? std::optional<int>(static_cast<int>(*chosen)) : std::nullopt);
    if (!chosen)
    {
        out.failure_reason = "no target box in the target frame";
        return out;
    }
    const auto ref_box = proposals[*chosen];

    const auto mask = backend.segment(target_frame, ref_box);
    trace.call(phase, "segment", std::nullopt, { { "box", box_json(ref_box) }, { "pixels", mask.count() } });
    const auto clean = denoise_depth_mask(target_frame, mask, config.candidate.mad_k, config.candidate.mad_floor);
    if (!clean)
    {
        out.failure_reason = "reference mask empty after denoising";
        return out;
    }
    out.reference_cloud = mask_to_cloud(target_frame, *clean, 0);
    const auto& reference = *out.reference_cloud;

    auto single_settings = config.fusion;
    single_settings.debug_dir.reset();
    out.single_view_box = fuse_and_box(reference, {}, single_settings);
    if (!config.multiview_enabled)
    {
        out.box = out.single_view_box;
        return out;
    }

    // The observation sphere and the candidate gate share the reference box center.
    const Vec3 center = out.single_view_box->center;
    const auto radius = orbit_radius(*out.single_view_box, config.sweep.orbit_min_radius);
    const auto ring = orbit_poses(center, radius, config.sweep.orbit_count, config.sweep.orbit_tilt_deg);
    trace.batch(phase, policy_name(ring.tag), ring.size());
    const auto views = render_batch(scene, ring.poses, config.intrinsics);
    for (const auto& p: ring.poses)
        trace.action(phase, p, ledger.record_action(p), "orbit");

    const auto offered = labeled(views);
    const auto good = backend.select_good_views(offered, target_frame, ref_box);
    auto good_json = nlohmann::ordered_json::array();
    for (const auto l: good)
        good_json.push_back(l);
    trace.call(phase, "select_good_views", std::nullopt, { { "labels", good_json } });

    const auto limit = backend.limit_decision(target_frame, ref_box);
    trace.call(phase, "limit_decision", std::nullopt, { { "limit_active", limit } });

    const Segmenter segmenter = [&backend](const RenderedFrame& f, const Box2D& b) { return backend.segment(f, b); };
    auto candidates = std::vector<CandidateCloud> {};
    for (const auto label: good)
    {
        if (label < 0 || static_cast<std::size_t>(label) >= views.size())
            throw ProtocolError("select_good_views returned label " + std::to_string(label) + " outside the batch");
        const auto& view = views[static_cast<std::size_t>(label)];
        const auto boxes = backend.detect_class(view, query.target_class);
        auto pick = select_candidate(view, boxes, segmenter, center, limit, config.candidate, label + 1);
        trace.call(phase, "select_candidate", label,
                   { { "boxes", boxes.size() }, { "accepted", pick.has_value() } });
        if (pick)
            candidates.push_back(std::move(*pick));
    }
    out.fused_candidates = candidates.size();
    out.box = fuse_and_box(reference, candidates, config.fusion);
    return out;
}

namespace
{
    class Episode
    {
      public:
        Episode(const GroundingQuery& query, const ScenePair& scenes, const std::vector<MemoryFrame>& memory,
                PerceptionBackend& backend, const AgentConfig& config):
            _query(query), _backend(backend), _config(config)
        {
            _state.memory = &memory;
            _state.prev_scene = &scenes.prev;
            _state.current_scene = &scenes.curr;
            _state.ledger = CostLedger(scenes.curr.standard_origin, config.speeds);
        }

        auto run() -> EpisodeOutcome
        {
            _out.trace.note(Phase::classify, "start", { { "query", _query.raw_text } });
            const auto verifiability = _backend.classify_query(_query);
            _out.trace.call(Phase::classify, "classify_query", std::nullopt,
                            { { "verdict", to_string(verifiability) } });

            if (!_config.use_memory)
                explore_without_memory();
            else
            {
                enter(Phase::retrieve);
                if (verifiability == Verifiability::verifiable)
                    path_verifiable();
                else
                    path_unverifiable();
                if (!_state.target_frame && _state.phase != Phase::failed)
                    fallback();
            }

            if (_state.target_frame)
                multiview();
            else if (_state.phase != Phase::failed)
                fail("no target frame");

            _out.final_phase = _state.phase;
            _out.ledger = _state.ledger;
            _out.box = _state.result.value_or(failure_box());
            return std::move(_out);
        }

      private:
        void enter(Phase next)
        {
            if (next == _state.phase)
                return;
            _out.trace.phase(_state.phase, next);
            _state.phase = next;
        }

        void fail(std::string reason)
        {
            _out.trace.note(_state.phase, "failure", { { "reason", reason } });
            _out.failure_reason = std::move(reason);
            enter(Phase::failed);
        }

        auto scene() const -> const SceneModel& { return *_state.current_scene; }

        /// Moves to `pose` in the current scene and observes.
        auto visit(const Pose& pose, std::string_view reason) -> RenderedFrame
        {
            _out.trace.action(_state.phase, pose, _state.ledger.record_action(pose), reason);
            return render(scene(), pose, _config.intrinsics);
        }

        /// Visits a committed batch in label order.
        auto sweep(const PoseBatch& batch) -> std::vector<RenderedFrame>
        {
            _out.trace.batch(_state.phase, policy_name(batch.tag), batch.size());
            auto frames = render_batch(scene(), batch.poses, _config.intrinsics);
            for (const auto& p: batch.poses)
                _out.trace.action(_state.phase, p, _state.ledger.record_action(p), policy_name(batch.tag));
            return frames;
        }

        auto choose(std::span<const LabeledFrame> frames, ImageRole role) -> std::optional<int>
        {
            const auto pick = _backend.choose_image(frames, _query, role);
            _out.trace.call(_state.phase, "choose_image", pick,
                            { { "role", to_string(role) }, { "offered", frames.size() } });
            return pick;
        }

        /// Memory frames that show `class_name`, labeled by frame id.
        auto memory_with(const std::string& class_name) -> std::vector<LabeledFrame>
        {
            auto out = std::vector<LabeledFrame> {};
            for (const auto& m: *_state.memory)
                if (!_backend.detect_class(m.frame, class_name).empty())
                    out.push_back({ m.frame_id, &m.frame });
            _out.trace.call(_state.phase, "detect_class", std::nullopt,
                            { { "class", class_name }, { "memory_frames", _state.memory->size() },
                              { "hits", out.size() } });
            return out;
        }

        auto memory_frame(int frame_id) const -> const MemoryFrame&
        {
            for (const auto& m: *_state.memory)
                if (m.frame_id == frame_id)
                    return m;
            throw ProtocolError("backend chose unknown memory frame " + std::to_string(frame_id));
        }

        /// Best memory frame for an object class, or nullopt.
        auto retrieve(const std::string& class_name, ImageRole role) -> const MemoryFrame*
        {
            const auto candidates = memory_with(class_name);
            if (candidates.empty())
                return nullptr;
            const auto pick = choose(candidates, role);
            return pick ? &memory_frame(*pick) : nullptr;
        }

        auto is_static(const MemoryFrame& mem, const RenderedFrame& now, ObjectRole role) -> bool
        {
            const auto verdict = _backend.compare_static(mem.frame, now, _query, role);
            _out.trace.call(_state.phase, "compare_static", mem.frame_id,
                            { { "object", role == ObjectRole::target ? "target" : "anchor" },
                              { "verdict", verdict ? nlohmann::ordered_json(*verdict) : nlohmann::ordered_json(nullptr) } });
            return verdict.value_or(false);
        }

        /// Relation sweep from the leveled anchor pose.
        auto relation_sweep(const Pose& anchor_pose) -> PoseBatch
        {
            const auto anchor = level_pose(anchor_pose);
            const auto kind = _backend.parse_relation(_query);
            _out.trace.call(_state.phase, "parse_relation", std::nullopt, { { "sweep", to_string(kind) } });
            switch (kind)
            {
                case SweepKind::up: return sras_up_poses(anchor, _config.sweep);
                case SweepKind::down: return sras_down_poses(anchor, _config.sweep);
                case SweepKind::horizontal:
                case SweepKind::between:
                    return sras_horizontal_poses(anchor, scene().standard_origin.translation, _config.sweep);
            }
            throw ProtocolError("parse_relation returned an unknown sweep");
        }

        /// Sweeps `batch` and asks for the target among its frames.
        auto search_target(const PoseBatch& batch) -> bool
        {
            const auto frames = sweep(batch);
            const auto offered = labeled(frames);
            const auto pick = choose(offered, ImageRole::find_target);
            if (!pick)
                return false;
            _state.target_frame = frames.at(static_cast<std::size_t>(*pick));
            return true;
        }

        void search_from_center()
        {
            enter(Phase::explore);
            const auto center = scene().standard_origin;
            (void)visit(center, "center");
            search_target(oss_poses(center, _config.sweep));
        }

        void path_unverifiable()
        {
            const auto* anchor = retrieve(_query.anchor_classes.front(), ImageRole::find_anchor);
            if (anchor == nullptr)
            {
                _out.trace.note(_state.phase, "anchor not in memory");
                return;
            }
            _state.anchor_pose = anchor->frame.pose;
            enter(Phase::verify);
            const auto now = visit(*_state.anchor_pose, "revisit_anchor");
            if (is_static(*anchor, now, ObjectRole::anchor))
            {
                enter(Phase::explore);
                search_target(relation_sweep(*_state.anchor_pose));
            }
            else
                search_from_center();
        }

        void path_verifiable()
        {
            const auto* target = retrieve(_query.target_class, ImageRole::find_target);
            const auto* anchor = retrieve(_query.anchor_classes.front(), ImageRole::find_anchor);
            if (anchor == nullptr)
            {
                _out.trace.note(_state.phase, "anchor not in memory");
                return;
            }
            _state.anchor_pose = anchor->frame.pose;
            enter(Phase::verify);

            auto target_still = false;
            auto target_now = std::optional<RenderedFrame> {};
            if (target != nullptr)
            {
                target_now = visit(target->frame.pose, "revisit_target");
                target_still = is_static(*target, *target_now, ObjectRole::target);
            }
            const auto anchor_now = visit(*_state.anchor_pose, "revisit_anchor");
            const auto anchor_still = is_static(*anchor, anchor_now, ObjectRole::anchor);

            if (anchor_still && target_still)
            {
                _state.target_frame = std::move(target_now);
                return;
            }
            enter(Phase::explore);
            if (anchor_still)
            {
                search_target(relation_sweep(*_state.anchor_pose));
                return;
            }

            // Anchor moved: re-find it from the center, stopping at the first sighting.
            const auto center = scene().standard_origin;
            (void)visit(center, "center");
            const auto ring = oss_poses(center, _config.sweep);
            _out.trace.batch(_state.phase, policy_name(ring.tag), ring.size());
            for (std::size_t i = 0; i < ring.size(); ++i)
            {
                const auto frame = visit(ring.poses[i], policy_name(ring.tag));
                const auto one = std::vector<LabeledFrame> { { static_cast<int>(i), &frame } };
                if (choose(one, ImageRole::first_anchor))
                {
                    _state.anchor_pose = ring.poses[i];
                    _out.trace.note(_state.phase, "anchor sighted", { { "step", i + 1 } });
                    search_target(relation_sweep(*_state.anchor_pose));
                    return;
                }
            }
            _out.trace.note(_state.phase, "anchor not re-found");
        }

        void fallback()
        {
            if (!_config.fallback_enabled)
            {
                fail("fallback disabled");
                return;
            }
            enter(Phase::fallback);
            auto offered = std::vector<LabeledFrame> {};
            for (const auto& m: *_state.memory)
                offered.push_back({ m.frame_id, &m.frame });
            const auto pick = offered.empty() ? std::nullopt : choose(offered, ImageRole::fallback_clearest);
            if (!pick)
            {
                fail("no memory frame shows the target class");
                return;
            }
            const auto start = memory_frame(*pick).frame.pose;
            (void)visit(start, "fallback_start");
            if (!search_target(oss_poses(level_pose(start), _config.sweep)))
                fail("target not found by the fallback sweep");
        }

        void explore_without_memory()
        {
            enter(Phase::explore);
            const auto& tour = scene().tour;
            if (tour.empty())
            {
                fail("no tour to explore");
                return;
            }
            auto batch = PoseBatch {};
            for (const auto i: wandering_order(tour, _state.ledger.current()))
            {
                batch.labels.push_back(static_cast<int>(batch.poses.size()));
                batch.poses.push_back(tour[i]);
            }
            _out.trace.note(_state.phase, "memory disabled, walking the tour");
            const auto frames = render_batch(scene(), batch.poses, _config.intrinsics);
            for (const auto& p: batch.poses)
                _out.trace.action(_state.phase, p, _state.ledger.record_action(p), "tour");
            const auto offered = labeled(frames);
            if (const auto pick = choose(offered, ImageRole::find_target))
                _state.target_frame = frames.at(static_cast<std::size_t>(*pick));
        }

        void multiview()
        {
            enter(Phase::multiview);
            auto mv = multiview_ground(*_state.target_frame, _query, scene(), _backend, _state.ledger, _out.trace,
                                       _config);
            _out.single_view_box = mv.single_view_box;
            _state.reference_cloud = std::move(mv.reference_cloud);
            if (!mv.box)
            {
                fail(mv.failure_reason);
                return;
            }
            _state.result = mv.box;
            _out.trace.note(Phase::multiview, "result",
                            { { "box", nlohmann::ordered_json::parse(box_to_json(*mv.box).dump()) },
                              { "fused_candidates", mv.fused_candidates } });
            enter(Phase::done);
        }

        const GroundingQuery& _query;
        PerceptionBackend& _backend;
        const AgentConfig& _config;
        EpisodeState _state;
        EpisodeOutcome _out;
    };
} // namespace

auto run_episode(const GroundingQuery& query, const ScenePair& scenes, const std::vector<MemoryFrame>& memory,
                 PerceptionBackend& backend, const AgentConfig& config) -> EpisodeOutcome
{
    query.validate();
    config.validate();
    return Episode(query, scenes, memory, backend, config).run();
}

} // namespace mg
