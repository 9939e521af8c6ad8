// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/bench.hpp>
#include <memgrounder/errors.hpp>

#include <algorithm>
#include <set>

namespace mg
{

void RelationThresholds::validate() const
{
    if (!(contact >= 0.0) || !(overlap > 0.0 && overlap <= 1.0) || !(margin >= 0.0))
        throw InvalidArgument("RelationThresholds: contact, overlap or margin out of range");
    if (!(between_lo >= 0.0 && between_lo < between_hi && between_hi <= 1.0) || !(corridor > 0.0))
        throw InvalidArgument("RelationThresholds: between range or corridor out of range");
    if (max_distractors < 0 || !(anchor_distance > 0.0))
        throw InvalidArgument("RelationThresholds: distractor cap or anchor distance out of range");
}

auto to_string(Uniqueness u) -> std::string_view { return u == Uniqueness::unique ? "unique" : "multiple"; }

namespace
{
    struct Extent
    {
        Vec3 lo;
        Vec3 hi;
        Vec3 center;
    };

    auto extent_of(const ObjectInstance& inst) -> Extent
    {
        const auto a = inst.box.world_aabb();
        return { a.center - a.half_extents, a.center + a.half_extents, inst.box.center };
    }

    // Gravity is +Y, so heights are -y.
    auto bottom_height(const Extent& e) -> double { return -e.hi.y(); }
    auto top_height(const Extent& e) -> double { return -e.lo.y(); }

    /// Horizontal overlap of `b` with `a`, as a fraction of `a`'s footprint.
    auto footprint_overlap(const Extent& a, const Extent& b) -> double
    {
        const auto dx = std::min(a.hi.x(), b.hi.x()) - std::max(a.lo.x(), b.lo.x());
        const auto dz = std::min(a.hi.z(), b.hi.z()) - std::max(a.lo.z(), b.lo.z());
        const auto area = (a.hi.x() - a.lo.x()) * (a.hi.z() - a.lo.z());
        if (dx <= 0.0 || dz <= 0.0 || area <= 0.0)
            return 0.0;
        return dx * dz / area;
    }

    auto supports(const Extent& target, const Extent& anchor, const RelationThresholds& t) -> bool
    {
        return std::abs(bottom_height(target) - top_height(anchor)) <= t.contact &&
               footprint_overlap(target, anchor) >= t.overlap;
    }

    auto above(const Extent& target, const Extent& anchor, const RelationThresholds& t) -> bool
    {
        return bottom_height(target) - top_height(anchor) > t.contact && footprint_overlap(target, anchor) >= t.overlap;
    }

    auto below(const Extent& target, const Extent& anchor, const RelationThresholds& t) -> bool
    {
        return bottom_height(anchor) - top_height(target) > t.contact && footprint_overlap(target, anchor) >= t.overlap;
    }

    auto between(const Extent& target, const Extent& a, const Extent& b, const RelationThresholds& t) -> bool
    {
        const Vec3 seg = b.center - a.center;
        const auto len2 = seg.squaredNorm();
        if (len2 <= 0.0)
            return false;
        const auto s = (target.center - a.center).dot(seg) / len2;
        const Vec3 foot = a.center + s * seg;
        return s > t.between_lo && s < t.between_hi && (target.center - foot).norm() < t.corridor;
    }

    /// Closest or farthest instance of a class to an anchor, when it leads
    /// the runner-up by the margin.
    auto superlative(const std::vector<const ObjectInstance*>& group, const Extent& anchor, bool closest,
                     const RelationThresholds& t) -> std::optional<int>
    {
        if (group.size() < 2)
            return std::nullopt;
        auto ranked = std::vector<std::pair<double, int>> {};
        for (const auto* inst: group)
        {
            const auto d = (inst->box.center - anchor.center).norm();
            ranked.emplace_back(closest ? d : -d, inst->instance_id);
        }
        std::sort(ranked.begin(), ranked.end());
        if (ranked[1].first - ranked[0].first < t.margin)
            return std::nullopt;
        return ranked[0].second;
    }

    auto same_class(const SceneModel& scene, const ObjectInstance& inst) -> std::vector<const ObjectInstance*>
    {
        return scene.instances_of(inst.class_name);
    }
} // namespace

auto relation_holds(const SceneModel& scene, const RelationFact& fact, const RelationThresholds& t) -> bool
{
    const auto* target = scene.find(fact.target_id);
    if (target == nullptr || fact.anchor_ids.empty())
        return false;
    auto anchors = std::vector<Extent> {};
    for (const auto id: fact.anchor_ids)
    {
        const auto* a = scene.find(id);
        if (a == nullptr || id == fact.target_id)
            return false;
        anchors.push_back(extent_of(*a));
    }
    const auto e = extent_of(*target);
    switch (fact.qualifier)
    {
        case Qualifier::on: return fact.relation == Relation::support && supports(e, anchors[0], t);
        case Qualifier::above: return fact.relation == Relation::vertical && above(e, anchors[0], t);
        case Qualifier::below: return fact.relation == Relation::vertical && below(e, anchors[0], t);
        case Qualifier::closest:
        case Qualifier::farthest:
        {
            if (fact.relation != Relation::horizontal || scene.find(fact.anchor_ids[0])->class_name == target->class_name)
                return false;
            const auto pick = superlative(same_class(scene, *target), anchors[0], fact.qualifier == Qualifier::closest, t);
            return pick == fact.target_id;
        }
        case Qualifier::between:
            return fact.relation == Relation::between && anchors.size() == 2 &&
                   fact.anchor_ids[0] != fact.anchor_ids[1] && between(e, anchors[0], anchors[1], t);
    }
    return false;
}

auto relation_predicates(const SceneModel& scene, const RelationThresholds& t) -> std::vector<RelationFact>
{
    t.validate();
    auto facts = std::set<RelationFact> {};
    const auto& all = scene.instances;
    for (const auto& target: all)
    {
        const auto e = extent_of(target);
        for (const auto& anchor: all)
        {
            if (anchor.instance_id == target.instance_id)
                continue;
            const auto a = extent_of(anchor);
            const auto ids = std::vector<int> { anchor.instance_id };
            if (supports(e, a, t))
                facts.insert({ target.instance_id, Relation::support, Qualifier::on, ids });
            if (above(e, a, t))
                facts.insert({ target.instance_id, Relation::vertical, Qualifier::above, ids });
            if (below(e, a, t))
                facts.insert({ target.instance_id, Relation::vertical, Qualifier::below, ids });
            for (const auto& other: all)
            {
                if (other.instance_id <= anchor.instance_id || other.instance_id == target.instance_id)
                    continue;
                if (between(e, a, extent_of(other), t))
                    facts.insert({ target.instance_id, Relation::between, Qualifier::between,
                                   { anchor.instance_id, other.instance_id } });
            }
        }
    }
    // Superlatives: per anchor and per class of at least two other instances.
    auto classes = std::set<std::string> {};
    for (const auto& inst: all)
        classes.insert(inst.class_name);
    for (const auto& anchor: all)
    {
        const auto a = extent_of(anchor);
        for (const auto& cls: classes)
        {
            auto group = std::vector<const ObjectInstance*> {};
            for (const auto* inst: scene.instances_of(cls))
                if (inst->instance_id != anchor.instance_id)
                    group.push_back(inst);
            if (group.size() != scene.count_of(cls))
                continue; // the anchor belongs to this class
            const auto ids = std::vector<int> { anchor.instance_id };
            if (const auto near = superlative(group, a, true, t))
                facts.insert({ *near, Relation::horizontal, Qualifier::closest, ids });
            if (const auto far = superlative(group, a, false, t))
                facts.insert({ *far, Relation::horizontal, Qualifier::farthest, ids });
        }
    }
    return { facts.begin(), facts.end() };
}

auto resolve_description(const SceneModel& scene, const GroundingQuery& query, const RelationThresholds& t)
    -> std::vector<int>
{
    auto anchor_ids = std::vector<int> {};
    for (const auto& cls: query.anchor_classes)
    {
        const auto found = scene.instances_of(cls);
        if (found.size() != 1)
            return {};
        anchor_ids.push_back(found.front()->instance_id);
    }
    auto out = std::vector<int> {};
    for (const auto* inst: scene.instances_of(query.target_class))
        if (relation_holds(scene, { inst->instance_id, query.relation, query.qualifier, anchor_ids }, t))
            out.push_back(inst->instance_id);
    return out;
}

auto generate_descriptions(const ScenePair& pair, const RelationThresholds& t) -> std::vector<RelationDescription>
{
    const auto& scene = pair.curr;
    auto out = std::vector<RelationDescription> {};
    for (const auto& fact: relation_predicates(scene, t))
    {
        const auto* target = scene.find(fact.target_id);
        auto q = GroundingQuery {};
        q.target_class = target->class_name;
        q.relation = fact.relation;
        q.qualifier = fact.qualifier;
        q.verifiability = verifiability_of(fact.relation);

        auto usable = static_cast<int>(scene.count_of(target->class_name)) - 1 <= t.max_distractors;
        auto anchor_ids = fact.anchor_ids;
        // One wording per anchor pair: anchors in class-name order.
        if (anchor_ids.size() == 2 && scene.find(anchor_ids[0])->class_name > scene.find(anchor_ids[1])->class_name)
            std::swap(anchor_ids[0], anchor_ids[1]);
        for (const auto id: anchor_ids)
        {
            const auto* anchor = scene.find(id);
            q.anchor_classes.push_back(anchor->class_name);
            usable = usable && scene.count_of(anchor->class_name) == 1 && anchor->class_name != target->class_name &&
                     (anchor->box.center - target->box.center).norm() <= t.anchor_distance;
        }
        if (q.anchor_classes.size() == 2 && q.anchor_classes[0] == q.anchor_classes[1])
            usable = false;
        if (!usable)
            continue;
        q.raw_text = describe(q);
        if (resolve_description(scene, q, t) != std::vector<int> { fact.target_id })
            continue;
        out.push_back({ q.raw_text, q, fact.target_id, anchor_ids,
                        scene.count_of(target->class_name) == 1 ? Uniqueness::unique : Uniqueness::multiple });
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.text, a.target_instance_id) < std::tie(b.text, b.target_instance_id);
    });
    return out;
}

auto description_to_json(const RelationDescription& d) -> nlohmann::ordered_json
{
    auto j = nlohmann::ordered_json::object();
    j["text"] = d.text;
    j["target_class"] = d.query.target_class;
    j["relation"] = to_string(d.query.relation);
    j["qualifier"] = to_string(d.query.qualifier);
    j["anchor_classes"] = d.query.anchor_classes;
    j["verifiability"] = to_string(d.query.verifiability);
    j["target_instance_id"] = d.target_instance_id;
    j["anchor_instance_ids"] = d.anchor_instance_ids;
    j["uniqueness"] = to_string(d.uniqueness);
    return j;
}

auto descriptions_to_jsonl(const std::vector<RelationDescription>& ds) -> std::string
{
    auto out = std::string {};
    for (const auto& d: ds)
        out += description_to_json(d).dump() + "\n";
    return out;
}

} // namespace mg
