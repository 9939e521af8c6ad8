// SPDX-License-Identifier: Apache-2.0
#pragma once

// HTTP client for a remote perception service. One POST endpoint per
// backend method; request {method, query, relation, images, params}, reply
// {label | labels | boxes | mask_rle | verdict}.

#include <memgrounder/perception.hpp>

#include <json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace mg
{

/// Prompt text per remote method; placeholders {query}, {ids}, {relation}.
class PromptTemplates
{
  public:
    /// Defaults paraphrasing the published prompt families.
    static auto defaults() -> PromptTemplates;

    void set(const std::string& method, std::string text);
    [[nodiscard]] auto has(const std::string& method) const -> bool;
    /// Fills the placeholders; throws InvalidArgument for an unknown method.
    [[nodiscard]] auto render(const std::string& method, std::string_view query, std::string_view ids,
                              std::string_view relation) const -> std::string;
    [[nodiscard]] auto methods() const -> std::vector<std::string>;

  private:
    std::map<std::string, std::string> _templates;
};

/// Every method name the remote client calls.
[[nodiscard]] auto remote_methods() -> const std::vector<std::string>&;

/// Template key of a call: the method name, with the image role appended
/// for image choices ("choose_image.find_target").
[[nodiscard]] auto prompt_keys() -> const std::vector<std::string>&;

struct RemoteConfig
{
    /// e.g. "http://127.0.0.1:8080"; methods are POSTed to base_url + "/" + method.
    std::string base_url;
    double timeout_s = 30.0;
    /// Attempts after the first one before BackendUnavailable.
    int retries = 2;
    double temperature = 0.1;
    double top_p = 0.3;
    /// Accepted for parity with the VLM-Grounder baselines; forwarded only.
    int ensemble_images = 7;
    int retry_limit = 3;
    /// Upper bound on concurrent requests to one endpoint.
    int max_in_flight = 1;

    void validate() const;
};

// Wire helpers.

[[nodiscard]] auto base64_encode(std::string_view bytes) -> std::string;
/// Throws ProtocolError on malformed input.
[[nodiscard]] auto base64_decode(std::string_view text) -> std::string;

/// Row-major run lengths, alternating unset/set and starting with unset.
[[nodiscard]] auto mask_to_rle(const Mask& mask) -> nlohmann::json;
/// Throws ProtocolError unless the runs cover exactly width x height pixels.
[[nodiscard]] auto mask_from_rle(const nlohmann::json& rle) -> Mask;

/// Invertible 24-bit colour of an instance id (background and shell included).
[[nodiscard]] auto id_color(std::int32_t id) -> std::uint32_t;
[[nodiscard]] auto id_from_color(std::uint32_t rgb) -> std::int32_t;

/// Flat-coloured RGB rendering of the instance map, PNG encoded.
[[nodiscard]] auto frame_to_png(const RenderedFrame& frame) -> std::string;
/// Instance map recovered from frame_to_png output.
[[nodiscard]] auto png_to_ids(std::string_view png) -> IdMap;

/// Image entry of a request: {id, png_base64, meta: {scene_id, pose, intrinsics}}.
[[nodiscard]] auto image_entry(int id, const RenderedFrame& frame) -> nlohmann::json;
/// Frame rebuilt from an image entry (ids and metadata; depth is zero).
[[nodiscard]] auto frame_from_entry(const nlohmann::json& entry) -> RenderedFrame;

/// Query fields as sent on the wire.
[[nodiscard]] auto query_to_json(const GroundingQuery& q) -> nlohmann::json;
[[nodiscard]] auto query_from_json(const nlohmann::json& j) -> GroundingQuery;

class RemoteBackend final: public PerceptionBackend
{
  public:
    RemoteBackend(RemoteConfig config, PromptTemplates prompts = PromptTemplates::defaults(), int stitch_budget = 6);
    ~RemoteBackend() override;

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

    /// Number of HTTP requests sent so far, retries included.
    [[nodiscard]] auto requests_sent() const -> std::size_t;

  protected:
    auto choose_image_batch(std::span<const LabeledFrame> frames, const GroundingQuery& query, ImageRole role)
        -> std::optional<int> override;

  private:
    struct Endpoint;

    /// POSTs and returns the parsed reply; retries transport failures.
    auto call(const std::string& method, const GroundingQuery* query, nlohmann::json images, nlohmann::json params)
        -> nlohmann::json;
    auto endpoint(const std::string& method) -> Endpoint&;

    RemoteConfig _config;
    PromptTemplates _prompts;
    std::mutex _endpoints_mutex;
    std::map<std::string, std::unique_ptr<Endpoint>> _endpoints;
    std::atomic<std::size_t> _requests { 0 };
};

} // namespace mg
