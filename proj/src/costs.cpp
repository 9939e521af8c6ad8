// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/costs.hpp>
#include <memgrounder/errors.hpp>

#include <algorithm>
#include <numeric>

namespace mg
{

void SpeedModel::validate() const
{
    if (!(v > 0.0 && omega > 0.0))
        throw InvalidArgument("SpeedModel: speeds must be positive");
}

auto transition_cost(const Pose& from, const Pose& to, const SpeedModel& speeds) -> CostDelta
{
    return {
        world::horizontal(to.translation - from.translation).norm() / speeds.v,
        geodesic_angle(from.rotation, to.rotation) / speeds.omega,
    };
}

CostLedger::CostLedger(const Pose& start, SpeedModel speeds): _speeds(speeds), _trajectory { start }
{
    _speeds.validate();
}

auto CostLedger::record_action(const Pose& next) -> CostDelta
{
    const auto delta = transition_cost(_trajectory.back(), next, _speeds);
    _trajectory.push_back(next);
    ++_actions;
    _trans += delta.trans_time;
    _rot += delta.rot_time;
    return delta;
}

auto CostLedger::summary() const -> CostSummary
{
    return { _actions, _trans, _rot, total_motion_cost() };
}

auto trajectory_cost(std::span<const Pose> poses, const SpeedModel& speeds, std::optional<int> action_override)
    -> CostSummary
{
    if (poses.empty())
        throw EmptyInput("trajectory_cost: empty pose list");
    speeds.validate();

    // Increments are summed in ascending order, so the total depends only on
    // the multiset of steps: a reversed trajectory costs exactly the same.
    auto trans = std::vector<double> {};
    auto rot = std::vector<double> {};
    for (std::size_t i = 1; i < poses.size(); ++i)
    {
        const auto d = transition_cost(poses[i - 1], poses[i], speeds);
        trans.push_back(d.trans_time);
        rot.push_back(d.rot_time);
    }
    std::sort(trans.begin(), trans.end());
    std::sort(rot.begin(), rot.end());

    auto out = CostSummary {};
    out.actions = action_override ? *action_override : static_cast<int>(poses.size() - 1);
    out.trans_time = std::accumulate(trans.begin(), trans.end(), 0.0);
    out.rot_time = std::accumulate(rot.begin(), rot.end(), 0.0);
    out.motion_time = out.trans_time + out.rot_time;
    return out;
}

} // namespace mg
