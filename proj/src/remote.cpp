// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>
#include <memgrounder/remote.hpp>

#include <httplib.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <condition_variable>
#include <csetjmp>
#include <cstring>

namespace mg
{

using nlohmann::json;

namespace
{
    constexpr std::uint32_t kColorMask = 0xFFFFFFu;
    constexpr std::uint32_t kColorMul = 0x9E3779u;

    constexpr auto inverse_mod_2_24(std::uint32_t a) -> std::uint32_t
    {
        auto x = a; // correct to 3 bits for odd a; each step doubles that
        for (int i = 0; i < 5; ++i)
            x = (x * (2u - a * x)) & kColorMask;
        return x;
    }
    constexpr std::uint32_t kColorInv = inverse_mod_2_24(kColorMul);
    static_assert(((kColorMul * kColorInv) & kColorMask) == 1u);

    constexpr std::string_view kBase64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

    auto protocol(const std::string& what) -> ProtocolError { return ProtocolError("remote: " + what); }

    auto box_to_wire(const Box2D& b) -> json { return json::array({ b.u0, b.v0, b.u1, b.v1 }); }

    auto box_from_wire(const json& j, int width, int height) -> Box2D
    {
        if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const json& x) {
                return x.is_number_integer();
            }))
            throw protocol("box must be four integers");
        const auto b = Box2D { j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>() };
        if (b.u0 < 0 || b.v0 < 0 || b.u1 > width || b.v1 > height || b.u0 >= b.u1 || b.v0 >= b.v1)
            throw protocol("box outside the image or empty");
        return b;
    }

    auto intrinsics_to_wire(const CameraIntrinsics& k) -> json
    {
        return { { "fx", k.fx }, { "fy", k.fy }, { "cx", k.cx }, { "cy", k.cy }, { "width", k.width },
                 { "height", k.height } };
    }

    auto intrinsics_from_wire(const json& j) -> CameraIntrinsics
    {
        try
        {
            return { j.at("fx").get<double>(), j.at("fy").get<double>(),  j.at("cx").get<double>(),
                     j.at("cy").get<double>(), j.at("width").get<int>(), j.at("height").get<int>() };
        }
        catch (const json::exception& e)
        {
            throw protocol(std::string("intrinsics: ") + e.what());
        }
    }

    auto labels_of(std::span<const LabeledFrame> frames) -> std::vector<int>
    {
        auto out = std::vector<int> {};
        for (const auto& f: frames)
            out.push_back(f.label);
        return out;
    }

    auto ids_text(const std::vector<int>& ids) -> std::string
    {
        auto s = std::string {};
        for (const auto id: ids)
            s += (s.empty() ? "" : ", ") + std::to_string(id);
        return s;
    }

    auto images_of(std::span<const LabeledFrame> frames) -> json
    {
        auto images = json::array();
        for (const auto& f: frames)
            images.push_back(image_entry(f.label, *f.frame));
        return images;
    }

    /// The reply's "label", which must be an offered label or null.
    auto offered_label(const json& reply, const std::vector<int>& offered) -> std::optional<int>
    {
        const auto it = reply.find("label");
        if (it == reply.end())
            throw protocol("reply lacks 'label'");
        if (it->is_null())
            return std::nullopt;
        if (!it->is_number_integer())
            throw protocol("label must be an integer or null");
        const auto label = it->get<int>();
        if (std::find(offered.begin(), offered.end(), label) == offered.end())
            throw protocol("label " + std::to_string(label) + " was not offered");
        return label;
    }

    auto offered_labels(const json& reply, const std::vector<int>& offered, std::size_t max) -> std::vector<int>
    {
        const auto it = reply.find("labels");
        if (it == reply.end() || !it->is_array())
            throw protocol("reply lacks a 'labels' array");
        if (it->size() > max)
            throw protocol("too many labels");
        auto out = std::vector<int> {};
        for (const auto& x: *it)
        {
            if (!x.is_number_integer())
                throw protocol("labels must be integers");
            const auto label = x.get<int>();
            if (std::find(offered.begin(), offered.end(), label) == offered.end())
                throw protocol("label " + std::to_string(label) + " was not offered");
            if (std::find(out.begin(), out.end(), label) != out.end())
                throw protocol("duplicate label " + std::to_string(label));
            out.push_back(label);
        }
        return out;
    }

    auto verdict_of(const json& reply) -> const json&
    {
        const auto it = reply.find("verdict");
        if (it == reply.end())
            throw protocol("reply lacks 'verdict'");
        return *it;
    }

    auto verdict_bool(const json& reply) -> bool
    {
        const auto& v = verdict_of(reply);
        if (!v.is_boolean())
            throw protocol("verdict must be a boolean");
        return v.get<bool>();
    }

    auto verdict_text(const json& reply) -> std::string
    {
        const auto& v = verdict_of(reply);
        if (!v.is_string())
            throw protocol("verdict must be a string");
        return v.get<std::string>();
    }

    struct PngWriteState
    {
        std::string bytes;
    };

    struct PngReadState
    {
        std::string_view bytes;
        std::size_t offset = 0;
    };

    void png_write_bytes(png_structp png, png_bytep data, png_size_t length)
    {
        auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
        state->bytes.append(reinterpret_cast<const char*>(data), length);
    }

    void png_read_bytes(png_structp png, png_bytep data, png_size_t length)
    {
        auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
        if (state->offset + length > state->bytes.size())
            png_error(png, "truncated");
        std::memcpy(data, state->bytes.data() + state->offset, length);
        state->offset += length;
    }

    void png_fail(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
    void png_quiet(png_structp, png_const_charp) {}

    /// Prompt family per template key.
    auto default_prompt_table() -> const std::map<std::string, std::string>&
    {
        static const auto table = std::map<std::string, std::string> {
            { "detect_class", "Detect every instance of '{query}' in the image and return their bounding boxes." },
            { "segment", "Segment the object inside the given box and return its mask." },
            { "choose_image.find_target",
              "The images are labeled {ids}. Which image shows {query}? Return the most confident label, or "
              "null if none shows it." },
            { "choose_image.find_anchor",
              "The images are labeled {ids}. Which image gives the clearest view of the reference object of "
              "{query}? Return one label, or null." },
            { "choose_image.first_anchor",
              "The images are labeled {ids} in the order they were taken while rotating. Return the first "
              "label in which the reference object of {query} appears, or null." },
            { "choose_image.fallback_clearest",
              "The images are labeled {ids}. Return the label of the image with the clearest view of any "
              "object of the target class in {query}, or null." },
            { "retrieve_images",
              "These are past observations labeled {ids}. Select the top 3 images most relevant to {query}, "
              "best first." },
            { "parse_relation",
              "For the query {query}, which way should the camera sweep to look for the target: up, down, "
              "horizontal or between?" },
            { "classify_query",
              "Can the relation in {query} be checked from a single view of target and reference object? "
              "Answer verifiable or unverifiable." },
            { "compare_static",
              "The first image is from memory, the second was taken at the same pose now. Has the {relation} "
              "object of {query} stayed in place? Answer true, false, or null if it is not in the first image." },
            { "choose_box",
              "The boxes are labeled {ids}. Which box contains {query}? Return one label, or null." },
            { "limit_decision",
              "Is the boxed object small and fully inside the view? Answer true or false." },
            { "select_good_views",
              "The views are labeled {ids} and were taken around the boxed object of the reference image. "
              "Select up to 4 views in which that object is seen clearly." },
        };
        return table;
    }

    void replace_all(std::string& text, std::string_view from, std::string_view to)
    {
        for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
            text.replace(pos, from.size(), to);
    }

    struct BaseUrl
    {
        std::string host;
        std::string prefix;
    };

    auto split_base_url(const std::string& url) -> BaseUrl
    {
        const auto scheme = url.find("://");
        const auto from = scheme == std::string::npos ? 0 : scheme + 3;
        const auto slash = url.find('/', from);
        if (slash == std::string::npos)
            return { url, "" };
        auto prefix = url.substr(slash);
        while (!prefix.empty() && prefix.back() == '/')
            prefix.pop_back();
        return { url.substr(0, slash), prefix };
    }
} // namespace

auto PromptTemplates::defaults() -> PromptTemplates
{
    auto p = PromptTemplates {};
    for (const auto& [key, text]: default_prompt_table())
        p.set(key, text);
    return p;
}

void PromptTemplates::set(const std::string& method, std::string text) { _templates[method] = std::move(text); }

auto PromptTemplates::has(const std::string& method) const -> bool { return _templates.contains(method); }

auto PromptTemplates::render(const std::string& method, std::string_view query, std::string_view ids,
                             std::string_view relation) const -> std::string
{
    const auto it = _templates.find(method);
    if (it == _templates.end())
        throw InvalidArgument("PromptTemplates: no template for '" + method + "'");
    auto text = it->second;
    replace_all(text, "{query}", query);
    replace_all(text, "{ids}", ids);
    replace_all(text, "{relation}", relation);
    return text;
}

auto PromptTemplates::methods() const -> std::vector<std::string>
{
    auto out = std::vector<std::string> {};
    for (const auto& [key, text]: _templates)
        out.push_back(key);
    return out;
}

auto remote_methods() -> const std::vector<std::string>&
{
    static const auto methods = std::vector<std::string> {
        "detect_class",   "segment",        "choose_image",   "retrieve_images", "parse_relation",
        "classify_query", "compare_static", "choose_box",     "limit_decision",  "select_good_views",
    };
    return methods;
}

auto prompt_keys() -> const std::vector<std::string>&
{
    static const auto keys = [] {
        auto out = std::vector<std::string> {};
        for (const auto& m: remote_methods())
        {
            if (m != "choose_image")
            {
                out.push_back(m);
                continue;
            }
            for (const auto r: { ImageRole::find_target, ImageRole::find_anchor, ImageRole::first_anchor,
                                 ImageRole::fallback_clearest })
                out.push_back(m + "." + std::string(to_string(r)));
        }
        return out;
    }();
    return keys;
}

void RemoteConfig::validate() const
{
    if (base_url.empty())
        throw InvalidArgument("RemoteConfig: empty base_url");
    if (!(timeout_s > 0.0))
        throw InvalidArgument("RemoteConfig: timeout_s must be positive");
    if (retries < 0 || retry_limit < 0)
        throw InvalidArgument("RemoteConfig: retry counts must be non-negative");
    if (ensemble_images < 1)
        throw InvalidArgument("RemoteConfig: ensemble_images must be at least 1");
    if (max_in_flight < 1)
        throw InvalidArgument("RemoteConfig: max_in_flight must be at least 1");
    if (temperature < 0.0 || top_p <= 0.0 || top_p > 1.0)
        throw InvalidArgument("RemoteConfig: sampling knobs out of range");
}

auto base64_encode(std::string_view bytes) -> std::string
{
    auto out = std::string {};
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3)
    {
        const auto n = std::min<std::size_t>(3, bytes.size() - i);
        auto chunk = std::uint32_t { 0 };
        for (std::size_t j = 0; j < 3; ++j)
            chunk = (chunk << 8) | (j < n ? static_cast<unsigned char>(bytes[i + j]) : 0u);
        for (std::size_t j = 0; j < 4; ++j)
            out += j <= n ? kBase64[(chunk >> (18 - 6 * j)) & 0x3Fu] : '=';
    }
    return out;
}

auto base64_decode(std::string_view text) -> std::string
{
    if (text.size() % 4 != 0)
        throw protocol("base64 length is not a multiple of 4");
    auto out = std::string {};
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4)
    {
        auto chunk = std::uint32_t { 0 };
        auto pad = 0;
        for (std::size_t j = 0; j < 4; ++j)
        {
            const auto c = text[i + j];
            auto value = std::uint32_t { 0 };
            if (c == '=')
            {
                if (i + 4 != text.size() || j < 2)
                    throw protocol("misplaced base64 padding");
                ++pad;
            }
            else
            {
                const auto pos = kBase64.find(c);
                if (pos == std::string_view::npos || pad > 0)
                    throw protocol("invalid base64 character");
                value = static_cast<std::uint32_t>(pos);
            }
            chunk = (chunk << 6) | value;
        }
        for (int j = 0; j < 3 - pad; ++j)
            out += static_cast<char>((chunk >> (16 - 8 * j)) & 0xFFu);
    }
    return out;
}

auto mask_to_rle(const Mask& mask) -> json
{
    auto runs = json::array();
    auto current = std::uint8_t { 0 };
    auto length = std::size_t { 0 };
    for (const auto px: mask.data)
    {
        const auto set = static_cast<std::uint8_t>(px != 0);
        if (set != current)
        {
            runs.push_back(length);
            current = set;
            length = 0;
        }
        ++length;
    }
    runs.push_back(length);
    return { { "width", mask.width }, { "height", mask.height }, { "runs", runs } };
}

auto mask_from_rle(const json& rle) -> Mask
{
    if (!rle.is_object() || !rle.contains("width") || !rle.contains("height") || !rle.contains("runs") ||
        !rle["width"].is_number_integer() || !rle["height"].is_number_integer() || !rle["runs"].is_array())
        throw protocol("mask_rle must be {width, height, runs}");
    const auto w = rle["width"].get<int>();
    const auto h = rle["height"].get<int>();
    if (w <= 0 || h <= 0)
        throw protocol("mask_rle has a non-positive size");
    auto mask = Mask(w, h);
    auto pos = std::size_t { 0 };
    auto set = false;
    for (const auto& run: rle["runs"])
    {
        if (!run.is_number_integer() || run.get<long long>() < 0)
            throw protocol("mask_rle runs must be non-negative integers");
        const auto n = run.get<std::size_t>();
        if (pos + n > mask.size())
            throw protocol("mask_rle runs exceed the image");
        if (set)
            std::fill_n(mask.data.begin() + static_cast<std::ptrdiff_t>(pos), n, std::uint8_t { 1 });
        pos += n;
        set = !set;
    }
    if (pos != mask.size())
        throw protocol("mask_rle runs do not cover the image");
    return mask;
}

auto id_color(std::int32_t id) -> std::uint32_t
{
    const auto value = static_cast<std::uint32_t>(id - kShellId + 1) & kColorMask;
    return (value * kColorMul) & kColorMask;
}

auto id_from_color(std::uint32_t rgb) -> std::int32_t
{
    const auto value = ((rgb & kColorMask) * kColorInv) & kColorMask;
    return static_cast<std::int32_t>(value) + kShellId - 1;
}

auto frame_to_png(const RenderedFrame& frame) -> std::string
{
    const auto& ids = frame.instance_ids;
    if (ids.width <= 0 || ids.height <= 0)
        throw InvalidArgument("frame_to_png: empty frame");
    auto row_bytes = std::vector<std::vector<png_byte>>(static_cast<std::size_t>(ids.height));
    auto rows = std::vector<png_bytep>(row_bytes.size());
    for (int v = 0; v < ids.height; ++v)
    {
        auto& row = row_bytes[static_cast<std::size_t>(v)];
        row.resize(static_cast<std::size_t>(ids.width) * 3);
        for (int u = 0; u < ids.width; ++u)
        {
            const auto c = id_color(ids.at(u, v));
            row[3 * u + 0] = static_cast<png_byte>((c >> 16) & 0xFFu);
            row[3 * u + 1] = static_cast<png_byte>((c >> 8) & 0xFFu);
            row[3 * u + 2] = static_cast<png_byte>(c & 0xFFu);
        }
        rows[static_cast<std::size_t>(v)] = row.data();
    }

    auto* png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_quiet);
    auto* info = png ? png_create_info_struct(png) : nullptr;
    if (!info)
    {
        png_destroy_write_struct(&png, nullptr);
        throw BackendError("frame_to_png: libpng allocation failed");
    }
    auto state = PngWriteState {};
    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_write_struct(&png, &info);
        throw BackendError("frame_to_png: libpng encoding failed");
    }
    png_set_write_fn(png, &state, png_write_bytes, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(ids.width), static_cast<png_uint_32>(ids.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return std::move(state.bytes);
}

auto png_to_ids(std::string_view bytes) -> IdMap
{
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
        throw protocol("image is not a PNG");
    auto* png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_quiet);
    auto* info = png ? png_create_info_struct(png) : nullptr;
    if (!info)
    {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw BackendError("png_to_ids: libpng allocation failed");
    }
    auto state = PngReadState { bytes, 0 };
    auto ids = IdMap {};
    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_read_struct(&png, &info, nullptr);
        throw protocol("PNG decoding failed");
    }
    png_set_read_fn(png, &state, png_read_bytes);
    png_read_png(png, info, PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND, nullptr);
    const auto w = static_cast<int>(png_get_image_width(png, info));
    const auto h = static_cast<int>(png_get_image_height(png, info));
    const auto channels = png_get_channels(png, info);
    if (channels != 3)
    {
        png_destroy_read_struct(&png, &info, nullptr);
        throw protocol("PNG must be 8-bit RGB");
    }
    auto** rows = png_get_rows(png, info);
    ids = IdMap(w, h, kBackgroundId);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
        {
            const auto* px = rows[v] + 3 * u;
            ids.at(u, v) = id_from_color((std::uint32_t { px[0] } << 16) | (std::uint32_t { px[1] } << 8) | px[2]);
        }
    png_destroy_read_struct(&png, &info, nullptr);
    return ids;
}

auto image_entry(int id, const RenderedFrame& frame) -> json
{
    return { { "id", id },
             { "png_base64", base64_encode(frame_to_png(frame)) },
             { "meta",
               { { "scene_id", frame.scene_id },
                 { "pose", pose_to_json(frame.pose) },
                 { "intrinsics", intrinsics_to_wire(frame.intrinsics) } } } };
}

auto frame_from_entry(const json& entry) -> RenderedFrame
{
    if (!entry.is_object() || !entry.contains("png_base64") || !entry["png_base64"].is_string())
        throw protocol("image entry lacks png_base64");
    auto frame = RenderedFrame {};
    frame.instance_ids = png_to_ids(base64_decode(entry["png_base64"].get<std::string>()));
    frame.depth = DepthMap(frame.instance_ids.width, frame.instance_ids.height, 0.0);
    if (const auto meta = entry.find("meta"); meta != entry.end())
    {
        try
        {
            frame.scene_id = meta->at("scene_id").get<std::string>();
            frame.pose = pose_from_json(meta->at("pose"));
        }
        catch (const std::exception& e)
        {
            throw protocol(std::string("image meta: ") + e.what());
        }
        frame.intrinsics = intrinsics_from_wire(meta->at("intrinsics"));
    }
    return frame;
}

auto query_to_json(const GroundingQuery& q) -> json
{
    return { { "raw_text", q.raw_text },
             { "target_class", q.target_class },
             { "relation", to_string(q.relation) },
             { "qualifier", to_string(q.qualifier) },
             { "anchor_classes", q.anchor_classes },
             { "verifiability", to_string(q.verifiability) } };
}

auto query_from_json(const json& j) -> GroundingQuery
{
    try
    {
        auto q = GroundingQuery {};
        q.raw_text = j.at("raw_text").get<std::string>();
        q.target_class = j.at("target_class").get<std::string>();
        const auto relation = parse_relation_name(j.at("relation").get<std::string>());
        const auto qualifier = parse_qualifier_name(j.at("qualifier").get<std::string>());
        const auto verifiability = parse_verifiability_name(j.at("verifiability").get<std::string>());
        if (!relation || !qualifier || !verifiability)
            throw protocol("query has an unknown relation, qualifier or verifiability");
        q.relation = *relation;
        q.qualifier = *qualifier;
        q.verifiability = *verifiability;
        q.anchor_classes = j.at("anchor_classes").get<std::vector<std::string>>();
        return q;
    }
    catch (const json::exception& e)
    {
        throw protocol(std::string("query: ") + e.what());
    }
}

/// Concurrency gate of one method endpoint.
struct RemoteBackend::Endpoint
{
    std::mutex mutex;
    std::condition_variable cv;
    int in_flight = 0;
};

RemoteBackend::RemoteBackend(RemoteConfig config, PromptTemplates prompts, int stitch_budget):
    PerceptionBackend(stitch_budget), _config(std::move(config)), _prompts(std::move(prompts))
{
    _config.validate();
    for (const auto& key: prompt_keys())
        if (!_prompts.has(key))
            throw InvalidArgument("RemoteBackend: no prompt template for '" + key + "'");
}

RemoteBackend::~RemoteBackend() = default;

auto RemoteBackend::requests_sent() const -> std::size_t { return _requests.load(); }

auto RemoteBackend::endpoint(const std::string& method) -> Endpoint&
{
    const auto lock = std::lock_guard(_endpoints_mutex);
    auto& slot = _endpoints[method];
    if (!slot)
        slot = std::make_unique<Endpoint>();
    return *slot;
}

auto RemoteBackend::call(const std::string& method, const GroundingQuery* query, json images, json params) -> json
{
    auto body = json::object();
    body["method"] = method;
    if (query)
    {
        body["query"] = query->raw_text;
        body["relation"] = to_string(query->relation);
        params["structured_query"] = query_to_json(*query);
    }
    body["images"] = std::move(images);
    params["temperature"] = _config.temperature;
    params["top_p"] = _config.top_p;
    params["ensemble_images"] = _config.ensemble_images;
    params["retry_limit"] = _config.retry_limit;
    body["params"] = std::move(params);
    const auto payload = body.dump();

    auto& gate = endpoint(method);
    {
        auto lock = std::unique_lock(gate.mutex);
        gate.cv.wait(lock, [&] { return gate.in_flight < _config.max_in_flight; });
        ++gate.in_flight;
    }
    struct Release
    {
        Endpoint& gate;
        ~Release()
        {
            {
                const auto lock = std::lock_guard(gate.mutex);
                --gate.in_flight;
            }
            gate.cv.notify_one();
        }
    } release { gate };

    const auto [host, prefix] = split_base_url(_config.base_url);
    const auto seconds = static_cast<time_t>(_config.timeout_s);
    const auto micros = static_cast<time_t>((_config.timeout_s - static_cast<double>(seconds)) * 1e6);
    auto last_error = std::string {};
    for (int attempt = 0; attempt <= _config.retries; ++attempt)
    {
        auto client = httplib::Client(host);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);
        ++_requests;
        const auto res = client.Post(prefix + "/" + method, payload, "application/json");
        if (!res)
        {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429 || res->status == 408)
        {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw protocol(method + " answered HTTP " + std::to_string(res->status));
        auto reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.is_object())
            throw protocol(method + " reply is not a JSON object");
        return reply;
    }
    throw BackendUnavailable("remote: " + method + " unavailable after " + std::to_string(_config.retries + 1) +
                             " attempts (" + last_error + ")");
}

auto RemoteBackend::detect_class(const RenderedFrame& frame, const std::string& class_name) -> std::vector<Box2D>
{
    auto images = json::array({ image_entry(0, frame) });
    auto params = json { { "class_name", class_name },
                         { "prompt", _prompts.render("detect_class", class_name, "0", "") } };
    const auto reply = call("detect_class", nullptr, std::move(images), std::move(params));
    const auto it = reply.find("boxes");
    if (it == reply.end() || !it->is_array())
        throw protocol("detect_class reply lacks a 'boxes' array");
    auto boxes = std::vector<Box2D> {};
    for (const auto& b: *it)
        boxes.push_back(box_from_wire(b, frame.instance_ids.width, frame.instance_ids.height));
    return boxes;
}

auto RemoteBackend::segment(const RenderedFrame& frame, const Box2D& box) -> Mask
{
    auto images = json::array({ image_entry(0, frame) });
    auto params = json { { "box", box_to_wire(box) }, { "prompt", _prompts.render("segment", "", "0", "") } };
    const auto reply = call("segment", nullptr, std::move(images), std::move(params));
    const auto it = reply.find("mask_rle");
    if (it == reply.end())
        throw protocol("segment reply lacks 'mask_rle'");
    auto mask = mask_from_rle(*it);
    if (mask.width != frame.instance_ids.width || mask.height != frame.instance_ids.height)
        throw protocol("segment mask size differs from the image");
    return mask;
}

auto RemoteBackend::choose_image_batch(std::span<const LabeledFrame> frames, const GroundingQuery& query,
                                       ImageRole role) -> std::optional<int>
{
    const auto offered = labels_of(frames);
    const auto key = "choose_image." + std::string(to_string(role));
    auto params = json { { "role", to_string(role) },
                         { "prompt", _prompts.render(key, query.raw_text, ids_text(offered), "") } };
    const auto reply = call("choose_image", &query, images_of(frames), std::move(params));
    return offered_label(reply, offered);
}

auto RemoteBackend::retrieve_images(std::span<const LabeledFrame> memory, const GroundingQuery& query, ImageRole role,
                                    int k) -> std::vector<int>
{
    if (k < 1)
        throw InvalidArgument("retrieve_images: k must be positive");
    const auto offered = labels_of(memory);
    auto params = json { { "role", to_string(role) },
                         { "k", k },
                         { "prompt", _prompts.render("retrieve_images", query.raw_text, ids_text(offered), "") } };
    const auto reply = call("retrieve_images", &query, images_of(memory), std::move(params));
    return offered_labels(reply, offered, static_cast<std::size_t>(k));
}

auto RemoteBackend::parse_relation(const GroundingQuery& query) -> SweepKind
{
    auto params = json { { "prompt", _prompts.render("parse_relation", query.raw_text, "", "") } };
    const auto verdict = verdict_text(call("parse_relation", &query, json::array(), std::move(params)));
    if (verdict == "support" || verdict == "up")
        return SweepKind::up;
    if (verdict == "down")
        return SweepKind::down;
    if (verdict == "horizontal")
        return SweepKind::horizontal;
    if (verdict == "between")
        return SweepKind::between;
    throw protocol("parse_relation verdict '" + verdict + "' is not a sweep");
}

auto RemoteBackend::classify_query(const GroundingQuery& query) -> Verifiability
{
    auto params = json { { "prompt", _prompts.render("classify_query", query.raw_text, "", "") } };
    const auto verdict = verdict_text(call("classify_query", &query, json::array(), std::move(params)));
    const auto v = parse_verifiability_name(verdict);
    if (!v)
        throw protocol("classify_query verdict '" + verdict + "' is not a verifiability");
    return *v;
}

auto RemoteBackend::compare_static(const RenderedFrame& memory, const RenderedFrame& now, const GroundingQuery& query,
                                   ObjectRole role) -> std::optional<bool>
{
    const auto role_name = std::string(role == ObjectRole::target ? "target" : "anchor");
    auto images = json::array({ image_entry(0, memory), image_entry(1, now) });
    auto params = json { { "object_role", role_name },
                         { "prompt", _prompts.render("compare_static", query.raw_text, "0, 1", role_name) } };
    const auto reply = call("compare_static", &query, std::move(images), std::move(params));
    const auto& v = verdict_of(reply);
    if (v.is_null())
        return std::nullopt;
    if (!v.is_boolean())
        throw protocol("compare_static verdict must be a boolean or null");
    return v.get<bool>();
}

auto RemoteBackend::choose_box(const RenderedFrame& frame, const std::vector<Box2D>& boxes,
                               const GroundingQuery& query) -> std::optional<std::size_t>
{
    auto offered = std::vector<int> {};
    auto wire = json::array();
    for (std::size_t i = 0; i < boxes.size(); ++i)
    {
        offered.push_back(static_cast<int>(i));
        wire.push_back(box_to_wire(boxes[i]));
    }
    auto params = json { { "boxes", wire },
                         { "prompt", _prompts.render("choose_box", query.raw_text, ids_text(offered), "") } };
    const auto reply = call("choose_box", &query, json::array({ image_entry(0, frame) }), std::move(params));
    const auto label = offered_label(reply, offered);
    if (!label)
        return std::nullopt;
    return static_cast<std::size_t>(*label);
}

auto RemoteBackend::limit_decision(const RenderedFrame& reference, const Box2D& ref_box) -> bool
{
    auto params = json { { "box", box_to_wire(ref_box) }, { "prompt", _prompts.render("limit_decision", "", "0", "") } };
    return verdict_bool(call("limit_decision", nullptr, json::array({ image_entry(0, reference) }), std::move(params)));
}

auto RemoteBackend::select_good_views(std::span<const LabeledFrame> views, const RenderedFrame& reference,
                                      const Box2D& ref_box) -> std::vector<int>
{
    const auto offered = labels_of(views);
    auto images = images_of(views);
    auto params = json { { "box", box_to_wire(ref_box) },
                         { "reference", image_entry(-1, reference) },
                         { "prompt", _prompts.render("select_good_views", "", ids_text(offered), "") } };
    auto labels = offered_labels(call("select_good_views", nullptr, std::move(images), std::move(params)), offered, 4);
    std::sort(labels.begin(), labels.end());
    return labels;
}

} // namespace mg
