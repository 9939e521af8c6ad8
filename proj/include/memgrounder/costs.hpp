// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/geometry.hpp>

#include <optional>
#include <span>
#include <vector>

namespace mg
{

/// Nominal robot speeds: meters per second and radians per second.
struct SpeedModel
{
    double v = 0.5;
    double omega = 1.0;

    /// Throws InvalidArgument unless both speeds are positive.
    void validate() const;
};

/// Increment booked by one action.
struct CostDelta
{
    double trans_time = 0.0;
    double rot_time = 0.0;
};

/// Cost quadruple in seconds.
struct CostSummary
{
    int actions = 0;
    double trans_time = 0.0;
    double rot_time = 0.0;
    double motion_time = 0.0;

    friend auto operator==(const CostSummary&, const CostSummary&) -> bool = default;
};

/// Action and motion cost accumulator. Translation cost counts horizontal
/// displacement only; rotation cost is the geodesic angle between
/// consecutive orientations. The starting placement is free.
class CostLedger
{
  public:
    explicit CostLedger(const Pose& start, SpeedModel speeds = {});

    auto record_action(const Pose& next) -> CostDelta;

    [[nodiscard]] auto actions() const -> int { return _actions; }
    [[nodiscard]] auto trans_time() const -> double { return _trans; }
    [[nodiscard]] auto rot_time() const -> double { return _rot; }
    [[nodiscard]] auto total_motion_cost() const -> double { return _trans + _rot; }
    [[nodiscard]] auto trajectory() const -> const std::vector<Pose>& { return _trajectory; }
    [[nodiscard]] auto current() const -> const Pose& { return _trajectory.back(); }
    [[nodiscard]] auto speeds() const -> const SpeedModel& { return _speeds; }
    [[nodiscard]] auto summary() const -> CostSummary;

  private:
    SpeedModel _speeds;
    std::vector<Pose> _trajectory;
    int _actions = 0;
    double _trans = 0.0;
    double _rot = 0.0;
};

/// Motion cost of one transition.
[[nodiscard]] auto transition_cost(const Pose& from, const Pose& to, const SpeedModel& speeds) -> CostDelta;

/// Folds record_action over the poses. The action count is n - 1 unless
/// `action_override` is given. Throws EmptyInput on an empty list.
[[nodiscard]] auto trajectory_cost(std::span<const Pose> poses, const SpeedModel& speeds = {},
                                   std::optional<int> action_override = std::nullopt) -> CostSummary;

} // namespace mg
