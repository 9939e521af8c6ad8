// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/query.hpp>
#include <memgrounder/scene.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mg
{

/// What an image choice is looking for.
enum class ImageRole
{
    find_target,
    find_anchor,
    /// Earliest frame in label order that shows the anchor.
    first_anchor,
    /// Frame with the clearest view of any object of the target class.
    fallback_clearest,
};

[[nodiscard]] auto to_string(ImageRole r) -> std::string_view;
[[nodiscard]] auto is_early_exit(ImageRole r) -> bool;

enum class ObjectRole
{
    target,
    anchor,
};

/// A frame offered to the backend under a batch-local label.
struct LabeledFrame
{
    int label = 0;
    const RenderedFrame* frame = nullptr;
};

/// Every detector, segmenter and VLM decision of the agent. Implementations
/// must be deterministic for fixed inputs and configuration.
class PerceptionBackend
{
  public:
    explicit PerceptionBackend(int stitch_budget = 6);
    virtual ~PerceptionBackend() = default;

    PerceptionBackend(const PerceptionBackend&) = delete;
    auto operator=(const PerceptionBackend&) -> PerceptionBackend& = delete;

    [[nodiscard]] auto stitch_budget() const -> int { return _stitch_budget; }

    virtual auto detect_class(const RenderedFrame& frame, const std::string& class_name) -> std::vector<Box2D> = 0;
    virtual auto segment(const RenderedFrame& frame, const Box2D& box) -> Mask = 0;

    /// Picks one label from `frames`. Batches above the stitch budget are
    /// split into chunks that are asked in order; early-exit roles stop at
    /// the first chunk that answers, other roles arbitrate the chunk winners
    /// with a final call. The result always comes from the offered labels.
    auto choose_image(std::span<const LabeledFrame> frames, const GroundingQuery& query, ImageRole role)
        -> std::optional<int>;

    /// Up to `k` memory labels ranked best first.
    virtual auto retrieve_images(std::span<const LabeledFrame> memory, const GroundingQuery& query, ImageRole role,
                                 int k = 3) -> std::vector<int> = 0;

    virtual auto parse_relation(const GroundingQuery& query) -> SweepKind = 0;
    virtual auto classify_query(const GroundingQuery& query) -> Verifiability = 0;

    /// Whether the object looks unmoved between a memory frame and a frame
    /// taken at the same pose now. nullopt when the object is not visible in
    /// the memory frame.
    virtual auto compare_static(const RenderedFrame& memory, const RenderedFrame& now, const GroundingQuery& query,
                                ObjectRole role) -> std::optional<bool> = 0;

    /// Index into `boxes` of the queried object, or nullopt.
    virtual auto choose_box(const RenderedFrame& frame, const std::vector<Box2D>& boxes, const GroundingQuery& query)
        -> std::optional<std::size_t> = 0;

    /// True when the 0.25 m candidate limit should apply, i.e. the boxed
    /// object of the reference image is neither very large nor partly outside
    /// the view.
    virtual auto limit_decision(const RenderedFrame& reference, const Box2D& ref_box) -> bool = 0;

    /// Up to four labels with the best views of the boxed reference object,
    /// in label order.
    virtual auto select_good_views(std::span<const LabeledFrame> views, const RenderedFrame& reference,
                                   const Box2D& ref_box) -> std::vector<int> = 0;

  protected:
    /// One decision over at most stitch_budget() frames.
    virtual auto choose_image_batch(std::span<const LabeledFrame> frames, const GroundingQuery& query,
                                    ImageRole role) -> std::optional<int> = 0;

  private:
    int _stitch_budget;
};

} // namespace mg
