// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON bindings for the on-disk documents.
//
// Scene pair (UTF-8 JSON, lengths in meters, rotations row-major):
//
//   { "schema_version": 1,
//     "prev_scene": { "scene_id", "extent": {"center":[3], "half_extents":[3]},
//                     "camera_height",
//                     "instances": [ { "instance_id", "class_name", "center":[3],
//                                      "half_extents":[3], "rotation_rowmajor":[9],
//                                      "correspondence_id"? } ],
//                     "tour"?: [ { "position":[3], "yaw_deg", "pitch_deg" } ] },
//     "curr_scene": { ... } }
//
// Instance ids -1 and -2 are reserved for background and room shell.

#include <memgrounder/scene.hpp>

#include <json.hpp>

namespace mg
{

constexpr int kSceneSchemaVersion = 1;

[[nodiscard]] auto parse_scene_pair(const nlohmann::json& doc) -> ScenePair;
[[nodiscard]] auto scene_pair_to_json(const ScenePair& pair) -> nlohmann::json;

[[nodiscard]] auto vec_to_json(const Vec3& v) -> nlohmann::json;
[[nodiscard]] auto pose_to_json(const Pose& pose) -> nlohmann::json;
[[nodiscard]] auto pose_from_json(const nlohmann::json& j) -> Pose;
[[nodiscard]] auto box_to_json(const Box3D& box) -> nlohmann::json;

/// Reads a whole file; throws LoadError naming the path on I/O failure.
[[nodiscard]] auto read_text_file(const std::filesystem::path& path) -> std::string;

} // namespace mg
