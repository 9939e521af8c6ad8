// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/oracle.hpp>

#include "hashing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mg
{

void OracleConfig::validate() const
{
    for (const auto rate: { miss_rate, false_rate, select_error_rate })
        if (!(rate >= 0.0 && rate <= 1.0))
            throw InvalidArgument("OracleConfig: rates must lie in [0, 1]");
}

auto visibility_threshold(const CameraIntrinsics& k) -> std::size_t
{
    constexpr double reference_pixels = 162.0 * 121.0;
    const auto scaled = std::lround(25.0 * static_cast<double>(k.pixel_count()) / reference_pixels);
    return static_cast<std::size_t>(std::max(1L, scaled));
}

auto frame_key(const RenderedFrame& frame) -> std::uint64_t
{
    auto h = detail::Fnv1a {};
    h.text(frame.scene_id);
    for (int i = 0; i < 9; ++i)
        h.value(frame.pose.rotation(i / 3, i % 3));
    for (int i = 0; i < 3; ++i)
        h.value(frame.pose.translation[i]);
    h.value(frame.intrinsics.width).value(frame.intrinsics.height);
    return h.digest();
}

auto projected_footprint_inside(const RenderedFrame& frame, const Box3D& box) -> double
{
    const auto& k = frame.intrinsics;
    const Pose camera_from_world = frame.pose.inverse();
    double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
    for (int corner = 0; corner < 8; ++corner)
    {
        const Vec3 s((corner & 1) ? 1 : -1, (corner & 2) ? 1 : -1, (corner & 4) ? 1 : -1);
        const Vec3 c = camera_from_world.apply(box.center + box.rotation * s.cwiseProduct(box.half_extents));
        if (c.z() <= 1e-6)
            return 0.0;
        const auto px = camera_to_pixel(c, k);
        u0 = std::min(u0, px.u);
        v0 = std::min(v0, px.v);
        u1 = std::max(u1, px.u);
        v1 = std::max(v1, px.v);
    }
    const auto area = (u1 - u0) * (v1 - v0);
    if (!(area > 0.0))
        return 0.0;
    const auto iw = std::max(0.0, std::min(u1, static_cast<double>(k.width)) - std::max(u0, 0.0));
    const auto ih = std::max(0.0, std::min(v1, static_cast<double>(k.height)) - std::max(v0, 0.0));
    return iw * ih / area;
}

namespace
{
    auto visible_pixels(const RenderedFrame& frame, int id) -> std::size_t
    {
        return static_cast<std::size_t>(
            std::count(frame.instance_ids.data.begin(), frame.instance_ids.data.end(), static_cast<std::int32_t>(id)));
    }

    // Pixel count and bounds of every instance in view.
    struct Footprint
    {
        std::size_t pixels = 0;
        Box2D bounds;
    };

    auto footprints(const RenderedFrame& frame) -> std::map<int, Footprint>
    {
        auto out = std::map<int, Footprint> {};
        const auto& ids = frame.instance_ids;
        for (int v = 0; v < ids.height; ++v)
            for (int u = 0; u < ids.width; ++u)
            {
                const auto id = ids.at(u, v);
                if (id < 0)
                    continue;
                auto [it, fresh] = out.try_emplace(id);
                auto& f = it->second;
                if (fresh)
                    f.bounds = { u, v, u + 1, v + 1 };
                ++f.pixels;
                f.bounds.u0 = std::min(f.bounds.u0, u);
                f.bounds.v0 = std::min(f.bounds.v0, v);
                f.bounds.u1 = std::max(f.bounds.u1, u + 1);
                f.bounds.v1 = std::max(f.bounds.v1, v + 1);
            }
        return out;
    }
} // namespace

OracleBackend::OracleBackend(OracleConfig config, GroundTruth truth, int stitch_budget):
    PerceptionBackend(stitch_budget), _config(config), _truth(std::move(truth))
{
    _config.validate();
    if (_truth.scenes == nullptr)
        throw InvalidArgument("OracleBackend: ground truth needs a scene pair");
    if (_truth.scenes->prev.scene_id == _truth.scenes->curr.scene_id)
        throw InvalidArgument("OracleBackend: paired scenes need distinct scene ids");
}

auto OracleBackend::scene_of(const RenderedFrame& frame) const -> const SceneModel&
{
    if (frame.scene_id == _truth.scenes->prev.scene_id)
        return _truth.scenes->prev;
    if (frame.scene_id == _truth.scenes->curr.scene_id)
        return _truth.scenes->curr;
    throw InvalidArgument("OracleBackend: frame from unknown scene '" + frame.scene_id + "'");
}

auto OracleBackend::referents_of(const RenderedFrame& frame) const -> const Referents&
{
    return &scene_of(frame) == &_truth.scenes->prev ? _truth.prev : _truth.curr;
}

auto OracleBackend::unit(std::uint64_t key, std::string_view method, std::uint64_t index) const -> double
{
    auto h = detail::Fnv1a {};
    h.value(_config.seed).value(key).text(method).value(index);
    return detail::unit_interval(h.digest());
}

auto OracleBackend::score(const RenderedFrame& frame, const GroundingQuery& query, ImageRole role) const
    -> std::size_t
{
    const auto threshold = visibility_threshold(frame.intrinsics);
    const auto& refs = referents_of(frame);
    const auto visible = [&](std::optional<int> id) -> std::size_t {
        if (!id)
            return 0;
        const auto n = visible_pixels(frame, *id);
        return n >= threshold ? n : 0;
    };
    switch (role)
    {
        case ImageRole::find_target: return visible(refs.target);
        case ImageRole::find_anchor:
        case ImageRole::first_anchor:
            return refs.anchors.empty() ? 0 : visible(refs.anchors.front());
        case ImageRole::fallback_clearest:
        {
            std::size_t total = 0;
            for (const auto* inst: scene_of(frame).instances_of(query.target_class))
                total += visible(inst->instance_id);
            return total;
        }
    }
    return 0;
}

auto OracleBackend::choose_image_batch(std::span<const LabeledFrame> frames, const GroundingQuery& query,
                                       ImageRole role) -> std::optional<int>
{
    auto pick = std::optional<int> {};
    std::size_t best = 0;
    for (const auto& f: frames)
    {
        const auto s = score(*f.frame, query, role);
        if (s == 0)
            continue;
        if (is_early_exit(role))
        {
            pick = f.label;
            break;
        }
        if (s > best)
        {
            best = s;
            pick = f.label;
        }
    }

    if (pick && _config.select_error_rate > 0.0)
    {
        auto key = detail::Fnv1a {};
        for (const auto& f: frames)
            key.value(frame_key(*f.frame));
        if (unit(key.digest(), "choose_image", static_cast<std::uint64_t>(role)) < _config.select_error_rate)
        {
            // Swap in another frame that shows the target class.
            auto others = std::vector<int> {};
            for (const auto& f: frames)
                if (f.label != *pick && score(*f.frame, query, ImageRole::fallback_clearest) > 0)
                    others.push_back(f.label);
            if (!others.empty())
                pick = others[static_cast<std::size_t>(unit(key.digest(), "choose_image_swap", 0) *
                                                       static_cast<double>(others.size()))];
        }
    }
    return pick;
}

auto OracleBackend::detect_class(const RenderedFrame& frame, const std::string& class_name) -> std::vector<Box2D>
{
    const auto& scene = scene_of(frame);
    const auto threshold = visibility_threshold(frame.intrinsics);
    const auto key = frame_key(frame);
    auto boxes = std::vector<Box2D> {};
    std::uint64_t index = 0;
    for (const auto& [id, fp]: footprints(frame))
    {
        const auto* inst = scene.find(id);
        if (inst == nullptr || inst->class_name != class_name || fp.pixels < threshold)
            continue;
        if (_config.miss_rate > 0.0 && unit(key, "detect_miss:" + class_name, index++) < _config.miss_rate)
            continue;
        boxes.push_back(fp.bounds);
    }
    if (_config.false_rate > 0.0 && unit(key, "detect_false:" + class_name, 0) < _config.false_rate)
    {
        const auto w = frame.intrinsics.width, h = frame.intrinsics.height;
        const auto u = static_cast<int>(unit(key, "detect_false_u", 0) * 0.8 * w);
        const auto v = static_cast<int>(unit(key, "detect_false_v", 0) * 0.8 * h);
        boxes.push_back({ u, v, u + std::max(2, w / 6), v + std::max(2, h / 6) });
    }
    return boxes;
}

auto OracleBackend::boxed_instance(const RenderedFrame& frame, const Box2D& box) const -> std::optional<int>
{
    auto inside = std::map<int, std::size_t> {};
    const auto& ids = frame.instance_ids;
    for (int v = std::max(0, box.v0); v < std::min(ids.height, box.v1); ++v)
        for (int u = std::max(0, box.u0); u < std::min(ids.width, box.u1); ++u)
            if (const auto id = ids.at(u, v); id >= 0)
                ++inside[id];
    if (inside.empty())
        return std::nullopt;

    const auto prints = footprints(frame);
    auto best = std::optional<int> {};
    double best_iou = -1.0;
    std::size_t best_count = 0;
    for (const auto& [id, count]: inside)
    {
        const auto iou = iou2d(prints.at(id).bounds, box);
        if (iou > best_iou || (iou == best_iou && count > best_count))
        {
            best = id;
            best_iou = iou;
            best_count = count;
        }
    }
    return best;
}

auto OracleBackend::segment(const RenderedFrame& frame, const Box2D& box) -> Mask
{
    auto mask = Mask(frame.instance_ids.width, frame.instance_ids.height);
    const auto id = boxed_instance(frame, box);
    if (!id)
        return mask;
    for (int v = std::max(0, box.v0); v < std::min(mask.height, box.v1); ++v)
        for (int u = std::max(0, box.u0); u < std::min(mask.width, box.u1); ++u)
            mask.at(u, v) = frame.instance_ids.at(u, v) == *id;
    return mask;
}

auto OracleBackend::retrieve_images(std::span<const LabeledFrame> memory, const GroundingQuery& query, ImageRole role,
                                    int k) -> std::vector<int>
{
    auto ranked = std::vector<std::pair<std::size_t, int>> {};
    for (const auto& f: memory)
        if (const auto s = score(*f.frame, query, role); s > 0)
            ranked.emplace_back(s, f.label);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    auto out = std::vector<int> {};
    for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < k; ++i)
        out.push_back(ranked[i].second);
    return out;
}

auto OracleBackend::parse_relation(const GroundingQuery& query) -> SweepKind
{
    return sweep_of(query.relation, query.qualifier);
}

auto OracleBackend::classify_query(const GroundingQuery& query) -> Verifiability
{
    switch (query.relation)
    {
        case Relation::support:
        case Relation::vertical: return Verifiability::verifiable;
        case Relation::horizontal:
        case Relation::between: return Verifiability::unverifiable;
    }
    throw InvalidArgument("classify_query: unknown relation");
}

auto OracleBackend::compare_static(const RenderedFrame& memory, const RenderedFrame& /*now*/,
                                   const GroundingQuery& /*query*/, ObjectRole role) -> std::optional<bool>
{
    const auto& refs = referents_of(memory);
    const auto id = role == ObjectRole::target ? refs.target
                                               : (refs.anchors.empty() ? std::nullopt
                                                                       : std::optional<int>(refs.anchors.front()));
    if (!id || visible_pixels(memory, *id) < visibility_threshold(memory.intrinsics))
        return std::nullopt;

    const auto& here = scene_of(memory);
    const auto& there = &here == &_truth.scenes->prev ? _truth.scenes->curr : _truth.scenes->prev;
    const auto* before = here.find(*id);
    const auto* after = before ? counterpart(*before, there) : nullptr;
    if (after == nullptr)
        return false;
    return !instance_moved(*before, *after, _config.move_tolerance);
}

auto OracleBackend::choose_box(const RenderedFrame& frame, const std::vector<Box2D>& boxes, const GroundingQuery&)
    -> std::optional<std::size_t>
{
    const auto& target = referents_of(frame).target;
    if (!target || boxes.empty())
        return std::nullopt;
    const auto prints = footprints(frame);
    const auto it = prints.find(*target);
    if (it == prints.end() || it->second.pixels < visibility_threshold(frame.intrinsics))
        return std::nullopt;

    auto best = std::optional<std::size_t> {};
    double best_iou = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i)
        if (const auto iou = iou2d(boxes[i], it->second.bounds); iou > best_iou)
        {
            best_iou = iou;
            best = i;
        }
    return best;
}

auto OracleBackend::same_object_in(const RenderedFrame& frame, const RenderedFrame& origin, int id) const
    -> std::optional<int>
{
    const auto& from = scene_of(origin);
    const auto& to = scene_of(frame);
    if (&from == &to)
        return id;
    const auto* inst = from.find(id);
    const auto* other = inst ? counterpart(*inst, to) : nullptr;
    return other ? std::optional<int>(other->instance_id) : std::nullopt;
}

auto OracleBackend::limit_decision(const RenderedFrame& reference, const Box2D& ref_box) -> bool
{
    const auto id = boxed_instance(reference, ref_box);
    if (!id)
        return true;
    const auto& box = scene_of(reference).find(*id)->box;
    if (box_diagonal(box) > 2.0)
        return false;
    return projected_footprint_inside(reference, box) >= 0.7;
}

auto OracleBackend::select_good_views(std::span<const LabeledFrame> views, const RenderedFrame& reference,
                                      const Box2D& ref_box) -> std::vector<int>
{
    const auto id = boxed_instance(reference, ref_box);
    if (!id)
        return {};
    auto ranked = std::vector<std::pair<std::size_t, int>> {};
    for (const auto& v: views)
    {
        const auto here = same_object_in(*v.frame, reference, *id);
        if (!here)
            continue;
        const auto n = visible_pixels(*v.frame, *here);
        if (n >= visibility_threshold(v.frame->intrinsics))
            ranked.emplace_back(n, v.label);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    auto out = std::vector<int> {};
    for (std::size_t i = 0; i < ranked.size() && i < 4; ++i)
        out.push_back(ranked[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mg
