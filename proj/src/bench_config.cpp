// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/bench.hpp>
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>

#include <functional>
#include <type_traits>

namespace mg
{

void BenchConfig::validate() const
{
    agent.validate();
    oracle.validate();
    relations.validate();
    if (stitch_budget < 1)
        throw InvalidArgument("BenchConfig: stitch_budget must be at least 1");
    if (crg_steps < 1 || !(crg_step_deg > 0.0))
        throw InvalidArgument("BenchConfig: central-rotation steps must be positive");
    if (workers < 1)
        throw InvalidArgument("BenchConfig: workers must be at least 1");
}

namespace
{
    using nlohmann::json;

    struct Field
    {
        std::function<void(BenchConfig&, const json&, const std::string&)> read;
        std::function<json(const BenchConfig&)> write;
    };

    auto as_number(const json& j, const std::string& path) -> double
    {
        if (!j.is_number())
            throw LoadError(path, "expected a number");
        return j.get<double>();
    }

    auto as_int(const json& j, const std::string& path) -> int
    {
        if (!j.is_number_integer())
            throw LoadError(path, "expected an integer");
        return j.get<int>();
    }

    auto as_bool(const json& j, const std::string& path) -> bool
    {
        if (!j.is_boolean())
            throw LoadError(path, "expected true or false");
        return j.get<bool>();
    }

    auto as_string(const json& j, const std::string& path) -> std::string
    {
        if (!j.is_string())
            throw LoadError(path, "expected a string");
        return j.get<std::string>();
    }

    auto as_numbers(const json& j, const std::string& path) -> std::vector<double>
    {
        if (!j.is_array() || j.empty())
            throw LoadError(path, "expected a non-empty array of numbers");
        auto out = std::vector<double> {};
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    template <class T>
    auto read_as(const json& j, const std::string& path) -> T
    {
        if constexpr (std::is_same_v<T, bool>)
            return as_bool(j, path);
        else if constexpr (std::is_same_v<T, int>)
            return as_int(j, path);
        else if constexpr (std::is_same_v<T, double>)
            return as_number(j, path);
        else if constexpr (std::is_same_v<T, std::string>)
            return as_string(j, path);
        else
            return as_numbers(j, path);
    }

    /// Field bound to a member reached through `ref`.
    template <class T>
    auto bind(T& (*ref)(BenchConfig&)) -> Field
    {
        return { [ref](BenchConfig& c, const json& j, const std::string& p) { ref(c) = read_as<T>(j, p); },
                 [ref](const BenchConfig& c) {
                     auto copy = c;
                     return json(ref(copy));
                 } };
    }

    /// Every key of the flat config document.
    auto fields() -> const std::map<std::string, Field>&
    {
        using C = BenchConfig;
        static const auto table = [] {
            auto f = std::map<std::string, Field> {};
            // Agent.
            f["speed_v"] = bind<double>([](C& c) -> double& { return c.agent.speeds.v; });
            f["speed_omega"] = bind<double>([](C& c) -> double& { return c.agent.speeds.omega; });
            f["oss_count"] = bind<int>([](C& c) -> int& { return c.agent.sweep.oss_count; });
            f["oss_step_deg"] = bind<double>([](C& c) -> double& { return c.agent.sweep.oss_step_deg; });
            f["oss_tilt_deg"] = bind<double>([](C& c) -> double& { return c.agent.sweep.oss_tilt_deg; });
            f["sras_yaws_deg"] =
                bind<std::vector<double>>([](C& c) -> std::vector<double>& { return c.agent.sweep.sras_yaws_deg; });
            f["sras_tilts_deg"] =
                bind<std::vector<double>>([](C& c) -> std::vector<double>& { return c.agent.sweep.sras_tilts_deg; });
            f["horizontal_count"] = bind<int>([](C& c) -> int& { return c.agent.sweep.horizontal_count; });
            f["horizontal_step_deg"] = bind<double>([](C& c) -> double& { return c.agent.sweep.horizontal_step_deg; });
            f["horizontal_tilt_deg"] = bind<double>([](C& c) -> double& { return c.agent.sweep.horizontal_tilt_deg; });
            f["back_off"] = bind<double>([](C& c) -> double& { return c.agent.sweep.back_off; });
            f["center_pull"] = bind<double>([](C& c) -> double& { return c.agent.sweep.center_pull; });
            f["orbit_count"] = bind<int>([](C& c) -> int& { return c.agent.sweep.orbit_count; });
            f["orbit_tilt_deg"] = bind<double>([](C& c) -> double& { return c.agent.sweep.orbit_tilt_deg; });
            f["orbit_min_radius"] = bind<double>([](C& c) -> double& { return c.agent.sweep.orbit_min_radius; });
            f["candidate_limit"] = bind<double>([](C& c) -> double& { return c.agent.candidate.limit; });
            f["mad_k"] = bind<double>([](C& c) -> double& { return c.agent.candidate.mad_k; });
            f["mad_floor"] = bind<double>([](C& c) -> double& { return c.agent.candidate.mad_floor; });
            f["volume_ratio"] = bind<double>([](C& c) -> double& { return c.agent.fusion.volume_ratio; });
            f["voxel"] = bind<double>([](C& c) -> double& { return c.agent.fusion.voxel; });
            f["oversize_box_fraction"] = bind<double>([](C& c) -> double& { return c.agent.oversize_box_fraction; });
            f["use_memory"] = bind<bool>([](C& c) -> bool& { return c.agent.use_memory; });
            f["fallback_enabled"] = bind<bool>([](C& c) -> bool& { return c.agent.fallback_enabled; });
            f["multiview_enabled"] = bind<bool>([](C& c) -> bool& { return c.agent.multiview_enabled; });
            f["resolution"] = { [](C& c, const json& j, const std::string& p) {
                                   const auto name = as_string(j, p);
                                   if (name == "working")
                                       c.agent.intrinsics = CameraIntrinsics::working();
                                   else if (name == "full")
                                       c.agent.intrinsics = CameraIntrinsics::full_resolution();
                                   else
                                       throw LoadError(p, "expected \"working\" or \"full\"");
                               },
                                [](const C& c) {
                                    const auto full = c.agent.intrinsics == CameraIntrinsics::full_resolution();
                                    return json(full ? "full" : "working");
                                } };
            // Oracle.
            f["seed"] = { [](C& c, const json& j, const std::string& p) {
                             if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
                                 throw LoadError(p, "expected a non-negative integer");
                             c.oracle.seed = j.get<std::uint64_t>();
                         },
                          [](const C& c) { return json(c.oracle.seed); } };
            f["miss_rate"] = bind<double>([](C& c) -> double& { return c.oracle.miss_rate; });
            f["false_rate"] = bind<double>([](C& c) -> double& { return c.oracle.false_rate; });
            f["select_error_rate"] = bind<double>([](C& c) -> double& { return c.oracle.select_error_rate; });
            f["move_translation_tol"] = bind<double>([](C& c) -> double& { return c.oracle.move_tolerance.translation; });
            f["move_rotation_tol_deg"] = { [](C& c, const json& j, const std::string& p) {
                                              c.oracle.move_tolerance.rotation = deg2rad(as_number(j, p));
                                          },
                                           [](const C& c) { return json(rad2deg(c.oracle.move_tolerance.rotation)); } };
            // Remote.
            f["remote_base_url"] = bind<std::string>([](C& c) -> std::string& { return c.remote.base_url; });
            f["remote_timeout_s"] = bind<double>([](C& c) -> double& { return c.remote.timeout_s; });
            f["remote_retries"] = bind<int>([](C& c) -> int& { return c.remote.retries; });
            f["temperature"] = bind<double>([](C& c) -> double& { return c.remote.temperature; });
            f["top_p"] = bind<double>([](C& c) -> double& { return c.remote.top_p; });
            f["ensemble_images"] = bind<int>([](C& c) -> int& { return c.remote.ensemble_images; });
            f["retry_limit"] = bind<int>([](C& c) -> int& { return c.remote.retry_limit; });
            f["max_in_flight"] = bind<int>([](C& c) -> int& { return c.remote.max_in_flight; });
            // Relations.
            f["contact"] = bind<double>([](C& c) -> double& { return c.relations.contact; });
            f["overlap"] = bind<double>([](C& c) -> double& { return c.relations.overlap; });
            f["margin"] = bind<double>([](C& c) -> double& { return c.relations.margin; });
            f["between_lo"] = bind<double>([](C& c) -> double& { return c.relations.between_lo; });
            f["between_hi"] = bind<double>([](C& c) -> double& { return c.relations.between_hi; });
            f["corridor"] = bind<double>([](C& c) -> double& { return c.relations.corridor; });
            f["max_distractors"] = bind<int>([](C& c) -> int& { return c.relations.max_distractors; });
            f["anchor_distance"] = bind<double>([](C& c) -> double& { return c.relations.anchor_distance; });
            // Suite.
            f["stitch_budget"] = bind<int>([](C& c) -> int& { return c.stitch_budget; });
            f["crg_steps"] = bind<int>([](C& c) -> int& { return c.crg_steps; });
            f["crg_step_deg"] = bind<double>([](C& c) -> double& { return c.crg_step_deg; });
            f["workers"] = bind<int>([](C& c) -> int& { return c.workers; });
            return f;
        }();
        return table;
    }
} // namespace

auto parse_bench_config(const nlohmann::json& doc) -> BenchConfig
{
    if (!doc.is_object())
        throw LoadError("config", "expected a JSON object");
    auto c = BenchConfig {};
    for (const auto& [key, value]: doc.items())
    {
        const auto it = fields().find(key);
        if (it == fields().end())
            throw LoadError("config." + key, "unknown key");
        it->second.read(c, value, "config." + key);
    }
    try
    {
        c.validate();
    }
    catch (const InvalidArgument& e)
    {
        throw LoadError("config", e.what());
    }
    return c;
}

auto load_bench_config(const std::filesystem::path& path) -> BenchConfig
{
    const auto text = read_text_file(path);
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw LoadError(path.string(), "not valid JSON");
    return parse_bench_config(doc);
}

auto bench_config_to_json(const BenchConfig& c) -> nlohmann::ordered_json
{
    auto out = nlohmann::ordered_json::object();
    for (const auto& [key, field]: fields())
        out[key] = nlohmann::ordered_json::parse(field.write(c).dump());
    return out;
}

} // namespace mg
