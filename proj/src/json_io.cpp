// SPDX-License-Identifier: Apache-2.0
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mg
{

using nlohmann::json;

namespace
{
    auto member(const json& obj, const std::string& path, const char* key) -> const json&
    {
        if (!obj.is_object())
            throw LoadError(path, "expected an object");
        const auto it = obj.find(key);
        if (it == obj.end())
            throw LoadError(path + "." + key, "missing required field");
        return *it;
    }

    auto number(const json& j, const std::string& path) -> double
    {
        if (!j.is_number())
            throw LoadError(path, "expected a number");
        const auto x = j.get<double>();
        if (!std::isfinite(x))
            throw LoadError(path, "expected a finite number");
        return x;
    }

    auto integer(const json& j, const std::string& path) -> int
    {
        if (!j.is_number_integer())
            throw LoadError(path, "expected an integer");
        return j.get<int>();
    }

    auto string(const json& j, const std::string& path) -> std::string
    {
        if (!j.is_string() || j.get<std::string>().empty())
            throw LoadError(path, "expected a non-empty string");
        return j.get<std::string>();
    }

    auto array_of(const json& j, const std::string& path, std::size_t n) -> std::vector<double>
    {
        if (!j.is_array() || j.size() != n)
            throw LoadError(path, "expected an array of " + std::to_string(n) + " numbers");
        auto out = std::vector<double> {};
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    auto vec3(const json& j, const std::string& path) -> Vec3
    {
        const auto a = array_of(j, path, 3);
        return { a[0], a[1], a[2] };
    }

    auto half_extents(const json& j, const std::string& path) -> Vec3
    {
        const Vec3 h = vec3(j, path);
        if (!(h.array() > 0.0).all())
            throw LoadError(path, "half extents must be strictly positive");
        return h;
    }

    auto rotation(const json& j, const std::string& path) -> Mat3
    {
        const auto a = array_of(j, path, 9);
        Mat3 r;
        for (int i = 0; i < 9; ++i)
            r(i / 3, i % 3) = a[static_cast<std::size_t>(i)];
        if (!is_proper_rotation(r, 1e-6))
            throw LoadError(path, "not a proper rotation");
        return r;
    }

    auto parse_scene(const json& j, const std::string& path) -> SceneModel
    {
        auto scene = SceneModel {};
        scene.scene_id = string(member(j, path, "scene_id"), path + ".scene_id");

        const auto& extent = member(j, path, "extent");
        scene.extent = Box3D {
            vec3(member(extent, path + ".extent", "center"), path + ".extent.center"),
            half_extents(member(extent, path + ".extent", "half_extents"), path + ".extent.half_extents"),
            Mat3::Identity(),
        };
        scene.camera_height = number(member(j, path, "camera_height"), path + ".camera_height");
        if (!(scene.camera_height > 0.0 && scene.camera_height < 2.0 * scene.extent.half_extents.y()))
            throw LoadError(path + ".camera_height", "camera height must lie inside the room");

        const Vec3 origin { scene.extent.center.x(), scene.floor_level() - scene.camera_height,
                            scene.extent.center.z() };
        scene.standard_origin = Pose { Mat3::Identity(), origin };

        const auto& instances = member(j, path, "instances");
        if (!instances.is_array())
            throw LoadError(path + ".instances", "expected an array");

        auto ids = std::set<int> {};
        auto links = std::set<int> {};
        for (std::size_t i = 0; i < instances.size(); ++i)
        {
            const auto ip = path + ".instances[" + std::to_string(i) + "]";
            const auto& ij = instances[i];
            auto inst = ObjectInstance {};
            inst.instance_id = integer(member(ij, ip, "instance_id"), ip + ".instance_id");
            if (inst.instance_id < 0)
                throw LoadError(ip + ".instance_id", "negative ids are reserved");
            if (!ids.insert(inst.instance_id).second)
                throw LoadError(ip + ".instance_id", "duplicate instance_id " + std::to_string(inst.instance_id));
            inst.class_name = string(member(ij, ip, "class_name"), ip + ".class_name");
            inst.box = Box3D {
                vec3(member(ij, ip, "center"), ip + ".center"),
                half_extents(member(ij, ip, "half_extents"), ip + ".half_extents"),
                rotation(member(ij, ip, "rotation_rowmajor"), ip + ".rotation_rowmajor"),
            };
            if (const auto it = ij.find("correspondence_id"); it != ij.end() && !it->is_null())
            {
                inst.correspondence_id = integer(*it, ip + ".correspondence_id");
                if (!links.insert(*inst.correspondence_id).second)
                    throw LoadError(ip + ".correspondence_id",
                                    "duplicate correspondence_id " + std::to_string(*inst.correspondence_id));
            }

            const auto aabb = inst.box.world_aabb();
            const Vec3 lo = aabb.center - aabb.half_extents;
            const Vec3 hi = aabb.center + aabb.half_extents;
            const Vec3 room_lo = scene.extent.center - scene.extent.half_extents;
            const Vec3 room_hi = scene.extent.center + scene.extent.half_extents;
            if (!((lo.array() >= room_lo.array() - 1e-6).all() && (hi.array() <= room_hi.array() + 1e-6).all()))
                throw LoadError(ip, "instance box extends outside the scene extent");
            scene.instances.push_back(std::move(inst));
        }

        if (const auto it = j.find("tour"); it != j.end())
        {
            if (!it->is_array() || it->empty())
                throw LoadError(path + ".tour", "expected a non-empty array");
            for (std::size_t i = 0; i < it->size(); ++i)
            {
                const auto tp = path + ".tour[" + std::to_string(i) + "]";
                const auto& tj = (*it)[i];
                scene.tour.push_back(pose_from_yaw_pitch(vec3(member(tj, tp, "position"), tp + ".position"),
                                                         number(member(tj, tp, "yaw_deg"), tp + ".yaw_deg"),
                                                         number(member(tj, tp, "pitch_deg"), tp + ".pitch_deg")));
            }
        }
        else
        {
            scene.tour = default_tour(scene);
        }
        return scene;
    }

    void check_links(const SceneModel& from, const SceneModel& to, const std::string& path)
    {
        for (std::size_t i = 0; i < from.instances.size(); ++i)
        {
            const auto& inst = from.instances[i];
            if (inst.correspondence_id && to.find_by_correspondence(*inst.correspondence_id) == nullptr)
                throw LoadError(path + ".instances[" + std::to_string(i) + "].correspondence_id",
                                "dangling correspondence " + std::to_string(*inst.correspondence_id));
        }
    }

    auto scene_to_json(const SceneModel& scene) -> json
    {
        auto instances = json::array();
        for (const auto& inst: scene.instances)
        {
            auto r = json::array();
            for (int i = 0; i < 9; ++i)
                r.push_back(inst.box.rotation(i / 3, i % 3));
            auto ij = json {
                { "instance_id", inst.instance_id },
                { "class_name", inst.class_name },
                { "center", vec_to_json(inst.box.center) },
                { "half_extents", vec_to_json(inst.box.half_extents) },
                { "rotation_rowmajor", r },
            };
            if (inst.correspondence_id)
                ij["correspondence_id"] = *inst.correspondence_id;
            instances.push_back(std::move(ij));
        }
        return {
            { "scene_id", scene.scene_id },
            { "extent", { { "center", vec_to_json(scene.extent.center) },
                          { "half_extents", vec_to_json(scene.extent.half_extents) } } },
            { "camera_height", scene.camera_height },
            { "instances", instances },
        };
    }
} // namespace

auto parse_scene_pair(const json& doc) -> ScenePair
{
    const auto version = integer(member(doc, "$", "schema_version"), "$.schema_version");
    if (version != kSceneSchemaVersion)
        throw LoadError("$.schema_version", "unsupported schema version " + std::to_string(version));

    auto pair = ScenePair {
        parse_scene(member(doc, "$", "prev_scene"), "$.prev_scene"),
        parse_scene(member(doc, "$", "curr_scene"), "$.curr_scene"),
    };
    check_links(pair.prev, pair.curr, "$.prev_scene");
    check_links(pair.curr, pair.prev, "$.curr_scene");
    return pair;
}

auto scene_pair_to_json(const ScenePair& pair) -> json
{
    return {
        { "schema_version", kSceneSchemaVersion },
        { "prev_scene", scene_to_json(pair.prev) },
        { "curr_scene", scene_to_json(pair.curr) },
    };
}

auto read_text_file(const std::filesystem::path& path) -> std::string
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw LoadError(path.string(), "cannot open file");
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

auto load_scene_pair(const std::filesystem::path& path) -> ScenePair
{
    const auto text = read_text_file(path);
    auto doc = json {};
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw LoadError(path.string(), std::string("malformed JSON: ") + e.what());
    }
    return parse_scene_pair(doc);
}

auto vec_to_json(const Vec3& v) -> json
{
    return json::array({ v.x(), v.y(), v.z() });
}

auto pose_to_json(const Pose& pose) -> json
{
    auto r = json::array();
    for (int i = 0; i < 9; ++i)
        r.push_back(pose.rotation(i / 3, i % 3));
    return { { "position", vec_to_json(pose.translation) }, { "rotation_rowmajor", r } };
}

auto pose_from_json(const json& j) -> Pose
{
    return { rotation(member(j, "pose", "rotation_rowmajor"), "pose.rotation_rowmajor"),
             vec3(member(j, "pose", "position"), "pose.position") };
}

auto box_to_json(const Box3D& box) -> json
{
    return { { "center", vec_to_json(box.center) }, { "half_extents", vec_to_json(box.half_extents) } };
}

} // namespace mg
