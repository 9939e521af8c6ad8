// SPDX-License-Identifier: Apache-2.0
// Command-line front end: description generation, benchmark runs,
// evaluation and depth debugging.
#include <memgrounder/bench.hpp>
#include <memgrounder/errors.hpp>
#include <memgrounder/json_io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

using namespace mg;

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto out = std::ofstream(path, std::ios::binary);
    out << text;
    if (!out)
        throw LoadError(path.string(), "cannot write file");
}

auto scene_files(const std::filesystem::path& dir) -> std::vector<std::filesystem::path>
{
    if (!std::filesystem::is_directory(dir))
        throw LoadError(dir.string(), "not a directory");
    auto out = std::vector<std::filesystem::path> {};
    for (const auto& e: std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

void cmd_generate(const std::filesystem::path& scenes, const std::filesystem::path& out)
{
    auto text = std::string {};
    auto count = std::size_t { 0 };
    for (const auto& file: scene_files(scenes))
    {
        const auto pair = load_scene_pair(file);
        for (const auto& d: generate_descriptions(pair))
        {
            auto j = nlohmann::ordered_json::object();
            j["scene"] = file.filename().string();
            const auto fields = description_to_json(d);
            for (const auto& [k, v]: fields.items())
                j[k] = v;
            text += j.dump() + "\n";
            ++count;
        }
    }
    write_file(out, text);
    std::cerr << count << " descriptions written to " << out.string() << "\n";
}

void cmd_run(const std::string& method_name, const std::filesystem::path& episodes, const std::string& backend_name,
             const std::optional<std::filesystem::path>& config_path, const std::filesystem::path& out,
             const std::optional<std::filesystem::path>& trace_dir)
{
    const auto method = parse_method(method_name);
    if (!method)
        throw InvalidArgument("unknown method '" + method_name + "'");
    const auto backend = backend_name == "remote" ? BackendKind::remote : BackendKind::oracle;
    auto config = config_path ? load_bench_config(*config_path) : BenchConfig {};
    if (backend == BackendKind::remote)
        config.remote.validate();
    auto suite = Suite(load_episodes(episodes), episodes.parent_path(), config);
    const auto results = suite.run(*method, backend, trace_dir);
    write_file(out, results_to_jsonl(results));
    std::cout << summary_table(evaluate(results));
}

void cmd_eval(const std::filesystem::path& results, bool markdown)
{
    const auto summary = evaluate(load_results(results));
    std::cout << (markdown ? summary_markdown(summary) : summary_table(summary));
}

auto parse_pose(const std::string& text) -> Pose
{
    auto values = std::vector<double> {};
    auto in = std::istringstream(text);
    auto item = std::string {};
    while (std::getline(in, item, ','))
    {
        try
        {
            auto used = std::size_t { 0 };
            values.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        }
        catch (const std::exception&)
        {
            throw InvalidArgument("--pose: '" + item + "' is not a number");
        }
    }
    if (values.size() != 5)
        throw InvalidArgument("--pose expects x,y,z,yaw,pitch");
    return pose_from_yaw_pitch(Vec3(values[0], values[1], values[2]), values[3], values[4]);
}

/// Binary 16-bit PGM of depth in millimeters; 0 where nothing was hit.
void cmd_render_debug(const std::filesystem::path& scene_path, const std::string& pose_text,
                      const std::filesystem::path& out, bool previous, bool full)
{
    const auto pair = load_scene_pair(scene_path);
    const auto intrinsics = full ? CameraIntrinsics::full_resolution() : CameraIntrinsics::working();
    const auto frame = render(previous ? pair.prev : pair.curr, parse_pose(pose_text), intrinsics);
    auto data = std::string("P5\n" + std::to_string(frame.depth.width) + " " + std::to_string(frame.depth.height) +
                            "\n65535\n");
    for (const auto d: frame.depth.data)
    {
        const auto mm = static_cast<unsigned>(std::clamp(std::lround(d * 1000.0), 0L, 65535L));
        data.push_back(static_cast<char>(mm >> 8));
        data.push_back(static_cast<char>(mm & 0xFF));
    }
    write_file(out, data);
}

} // namespace

auto main(int argc, char** argv) -> int
{
    auto app = CLI::App("Memory-driven 3D grounding benchmark");
    app.require_subcommand(1);

    auto scenes = std::filesystem::path {};
    auto descriptions = std::filesystem::path {};
    auto* generate = app.add_subcommand("generate", "Enumerate relation descriptions of every scene pair in a directory");
    generate->add_option("--scenes", scenes, "Directory of scene-pair JSON files")->required();
    generate->add_option("--out", descriptions, "Output JSON-lines file")->required();

    auto method = std::string {};
    auto episodes = std::filesystem::path {};
    auto backend = std::string("oracle");
    auto config = std::optional<std::filesystem::path> {};
    auto results = std::filesystem::path {};
    auto trace_dir = std::optional<std::filesystem::path> {};
    auto* run = app.add_subcommand("run", "Run one method over an episode file");
    run->add_option("--method", method, "mcg, wg, crg or mog")
        ->required()
        ->check(CLI::IsMember({ "mcg", "wg", "crg", "mog" }));
    run->add_option("--episodes", episodes, "Episode JSON-lines file")->required()->check(CLI::ExistingFile);
    run->add_option("--backend", backend, "oracle or remote")->check(CLI::IsMember({ "oracle", "remote" }));
    run->add_option("--config", config, "Flat JSON config document")->check(CLI::ExistingFile);
    run->add_option("--out", results, "Results JSON-lines file")->required();
    run->add_option("--trace-dir", trace_dir, "Directory for per-episode traces");

    auto eval_input = std::filesystem::path {};
    auto markdown = false;
    auto* eval = app.add_subcommand("eval", "Summarize a results file");
    eval->add_option("--results", eval_input, "Results JSON-lines file")->required()->check(CLI::ExistingFile);
    eval->add_flag("--markdown", markdown, "Print a markdown table");

    auto scene = std::filesystem::path {};
    auto pose = std::string {};
    auto depth_out = std::filesystem::path {};
    auto previous = false;
    auto full = false;
    auto* debug = app.add_subcommand("render-debug", "Render one depth map as a 16-bit PGM in millimeters");
    debug->add_option("--scene", scene, "Scene-pair JSON file")->required()->check(CLI::ExistingFile);
    debug->add_option("--pose", pose, "x,y,z,yaw,pitch with angles in degrees")->required();
    debug->add_option("--out", depth_out, "Output PGM file")->required();
    debug->add_flag("--previous", previous, "Render the previous scene instead of the current one");
    debug->add_flag("--full-resolution", full, "Render at 1296x968 instead of 162x121");

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (*generate)
            cmd_generate(scenes, descriptions);
        else if (*run)
            cmd_run(method, episodes, backend, config, results, trace_dir);
        else if (*eval)
            cmd_eval(eval_input, markdown);
        else if (*debug)
            cmd_render_debug(scene, pose, depth_out, previous, full);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
