// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/perception.hpp>

#include <algorithm>

namespace mg
{

auto to_string(ImageRole r) -> std::string_view
{
    switch (r)
    {
        case ImageRole::find_target: return "find_target";
        case ImageRole::find_anchor: return "find_anchor";
        case ImageRole::first_anchor: return "first_anchor";
        case ImageRole::fallback_clearest: return "fallback_clearest";
    }
    return "unknown";
}

auto is_early_exit(ImageRole r) -> bool
{
    return r == ImageRole::first_anchor;
}

PerceptionBackend::PerceptionBackend(int stitch_budget): _stitch_budget(stitch_budget)
{
    if (stitch_budget < 2)
        throw InvalidArgument("PerceptionBackend: stitch budget must be at least 2");
}

auto PerceptionBackend::choose_image(std::span<const LabeledFrame> frames, const GroundingQuery& query, ImageRole role)
    -> std::optional<int>
{
    if (frames.empty())
        return std::nullopt;

    const auto offered = [&](int label) {
        return std::any_of(frames.begin(), frames.end(), [&](const LabeledFrame& f) { return f.label == label; });
    };
    const auto budget = static_cast<std::size_t>(_stitch_budget);

    if (frames.size() <= budget)
    {
        const auto pick = choose_image_batch(frames, query, role);
        if (pick && !offered(*pick))
            throw ProtocolError("choose_image: backend returned label " + std::to_string(*pick) +
                                " which was not offered");
        return pick;
    }

    auto winners = std::vector<LabeledFrame> {};
    for (std::size_t begin = 0; begin < frames.size(); begin += budget)
    {
        const auto chunk = frames.subspan(begin, std::min(budget, frames.size() - begin));
        const auto pick = choose_image(chunk, query, role);
        if (!pick)
            continue;
        if (is_early_exit(role))
            return pick;
        winners.push_back(*std::find_if(chunk.begin(), chunk.end(),
                                        [&](const LabeledFrame& f) { return f.label == *pick; }));
    }
    if (winners.empty())
        return std::nullopt;
    if (winners.size() == 1)
        return winners.front().label;
    return choose_image(winners, query, role);
}

} // namespace mg
