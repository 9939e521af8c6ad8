// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ground-truth perception: answers every backend question from the scene
// models, with optional seeded noise.

#include <memgrounder/perception.hpp>

#include <cstdint>

namespace mg
{

struct OracleConfig
{
    std::uint64_t seed = 0;
    /// Probability a true detection is dropped.
    double miss_rate = 0.0;
    /// Probability a spurious box is added to a detection result.
    double false_rate = 0.0;
    /// Probability an image choice returns another frame showing the target class.
    double select_error_rate = 0.0;
    /// Motion below these tolerances counts as unmoved in compare_static.
    MoveTolerance move_tolerance;

    /// Throws InvalidArgument unless every rate lies in [0, 1].
    void validate() const;
};

/// Instances a query refers to within one scene.
struct Referents
{
    std::optional<int> target;
    std::vector<int> anchors;
};

/// Episode ground truth the oracle answers from. Frames are attributed to a
/// scene through RenderedFrame::scene_id.
struct GroundTruth
{
    const ScenePair* scenes = nullptr;
    Referents prev;
    Referents curr;
};

/// Minimum visible pixel count of a detectable instance: 25 pixels at the
/// 162x121 working resolution, scaled with the pixel count.
[[nodiscard]] auto visibility_threshold(const CameraIntrinsics& k) -> std::size_t;

/// Fraction of the projected corner bounding box of `box` that falls inside
/// the image of `frame`; 0 when any corner is behind the camera.
[[nodiscard]] auto projected_footprint_inside(const RenderedFrame& frame, const Box3D& box) -> double;

class OracleBackend final: public PerceptionBackend
{
  public:
    OracleBackend(OracleConfig config, GroundTruth truth, int stitch_budget = 6);

    auto detect_class(const RenderedFrame& frame, const std::string& class_name) -> std::vector<Box2D> override;
    auto segment(const RenderedFrame& frame, const Box2D& box) -> Mask override;
    auto retrieve_images(std::span<const LabeledFrame> memory, const GroundingQuery& query, ImageRole role, int k)
        -> std::vector<int> override;
    auto parse_relation(const GroundingQuery& query) -> SweepKind override;
    auto classify_query(const GroundingQuery& query) -> Verifiability override;
    auto compare_static(const RenderedFrame& memory, const RenderedFrame& now, const GroundingQuery& query,
                        ObjectRole role) -> std::optional<bool> override;
    auto choose_box(const RenderedFrame& frame, const std::vector<Box2D>& boxes, const GroundingQuery& query)
        -> std::optional<std::size_t> override;
    auto limit_decision(const RenderedFrame& reference, const Box2D& ref_box) -> bool override;
    auto select_good_views(std::span<const LabeledFrame> views, const RenderedFrame& reference,
                           const Box2D& ref_box) -> std::vector<int> override;

  protected:
    auto choose_image_batch(std::span<const LabeledFrame> frames, const GroundingQuery& query, ImageRole role)
        -> std::optional<int> override;

  private:
    [[nodiscard]] auto scene_of(const RenderedFrame& frame) const -> const SceneModel&;
    [[nodiscard]] auto referents_of(const RenderedFrame& frame) const -> const Referents&;
    /// Visible-area score of a frame for a role; 0 when the role's object is not visible.
    [[nodiscard]] auto score(const RenderedFrame& frame, const GroundingQuery& query, ImageRole role) const
        -> std::size_t;
    /// Instance whose full mask best matches `box`, if any.
    [[nodiscard]] auto boxed_instance(const RenderedFrame& frame, const Box2D& box) const -> std::optional<int>;
    /// Id in `frame`'s scene of the physical object `id` of `origin`.
    [[nodiscard]] auto same_object_in(const RenderedFrame& frame, const RenderedFrame& origin, int id) const
        -> std::optional<int>;
    [[nodiscard]] auto unit(std::uint64_t frame_key, std::string_view method, std::uint64_t index) const -> double;

    OracleConfig _config;
    GroundTruth _truth;
};

/// Content key of a frame used to seed per-frame noise.
[[nodiscard]] auto frame_key(const RenderedFrame& frame) -> std::uint64_t;

} // namespace mg
