#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "evtos/core.hpp"
#include "evtos/eval.hpp"
#include "evtos/hwmodel.hpp"
#include "evtos/pipeline.hpp"
#include "evtos/scene.hpp"

// Run configuration: one JSON file covering every stage, with strict key
// checking (a typo fails fast instead of silently falling back to a
// default). CLI flags override individual fields after the file is read.

namespace evtos {

using nlohmann::json;

struct RunConfig {
    SensorGeometry geometry{240, 180};
    uint64_t seed = 1;

    bool stcf_enabled = true;
    StcfConfig stcf;
    TosConfig tos;
    HarrisConfig harris;
    int64_t lut_period_events = 5000;
    int64_t lut_period_us = 0;
    bool per_polarity = false;

    std::string op_table_path;  // empty = built-in table
    int64_t dvfs_window_us = 10000;
    double headroom = 1.0;
    bool dvfs = true;

    double ber = 0.0;
    bool fault_per_word = false;

    SceneConfig scene;
    double gt_tolerance_px = 3.0;

    PipelineConfig pipeline_config() const {
        PipelineConfig cfg;
        cfg.geometry = geometry;
        cfg.stcf_enabled = stcf_enabled;
        cfg.stcf = stcf;
        cfg.tos = tos;
        cfg.harris = harris;
        cfg.lut_period_events = lut_period_events;
        cfg.lut_period_us = lut_period_us;
        cfg.per_polarity = per_polarity;
        return cfg;
    }

    SceneConfig scene_config() const {
        SceneConfig cfg = scene;
        cfg.seed = derive_seed(seed, "scene");
        return cfg;
    }
};

namespace detail {

inline void check_keys(const json& obj, const std::string& scope,
                       const std::set<std::string>& allowed) {
    if (!obj.is_object())
        throw config_error("config: " + (scope.empty() ? "document" : scope) +
                           " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw config_error("config: unknown key \"" +
                               (scope.empty() ? key : scope + "." + key) + "\"");
}

template <typename T>
inline void read_field(const json& obj, const std::string& scope, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("config: bad value for \"" + scope + "." + key + "\"");
    }
}

}  // namespace detail

inline TosMode tos_mode_from_string(const std::string& name) {
    if (name == "quantized") return TosMode::Quantized;
    if (name == "reference") return TosMode::Reference;
    throw config_error("tos.mode must be \"quantized\" or \"reference\", got \"" + name + "\"");
}

inline const char* tos_mode_to_string(TosMode mode) {
    return mode == TosMode::Quantized ? "quantized" : "reference";
}

inline RunConfig run_config_from_json(const json& root) {
    RunConfig cfg;
    detail::check_keys(root, "", {"geometry", "seed", "stcf", "tos", "harris", "pipeline", "hw",
                                  "fault", "scene", "eval"});
    if (root.contains("geometry")) {
        const json& g = root.at("geometry");
        detail::check_keys(g, "geometry", {"width", "height"});
        detail::read_field(g, "geometry", "width", cfg.geometry.width);
        detail::read_field(g, "geometry", "height", cfg.geometry.height);
    }
    detail::read_field(root, "", "seed", cfg.seed);
    if (root.contains("stcf")) {
        const json& s = root.at("stcf");
        detail::check_keys(s, "stcf", {"enabled", "window_us", "support", "radius"});
        detail::read_field(s, "stcf", "enabled", cfg.stcf_enabled);
        detail::read_field(s, "stcf", "window_us", cfg.stcf.window_us);
        detail::read_field(s, "stcf", "support", cfg.stcf.support);
        detail::read_field(s, "stcf", "radius", cfg.stcf.radius);
    }
    if (root.contains("tos")) {
        const json& t = root.at("tos");
        detail::check_keys(t, "tos",
                           {"patch", "threshold", "mode", "decode_zero_as_224", "per_polarity"});
        detail::read_field(t, "tos", "patch", cfg.tos.patch);
        detail::read_field(t, "tos", "threshold", cfg.tos.threshold);
        if (t.contains("mode")) cfg.tos.mode = tos_mode_from_string(t.at("mode").get<std::string>());
        detail::read_field(t, "tos", "decode_zero_as_224", cfg.tos.decode_zero_as_224);
        detail::read_field(t, "tos", "per_polarity", cfg.per_polarity);
    }
    if (root.contains("harris")) {
        const json& h = root.at("harris");
        detail::check_keys(h, "harris",
                           {"sobel_aperture", "window_aperture", "k", "score_threshold"});
        detail::read_field(h, "harris", "sobel_aperture", cfg.harris.sobel_aperture);
        detail::read_field(h, "harris", "window_aperture", cfg.harris.window_aperture);
        detail::read_field(h, "harris", "k", cfg.harris.k);
        detail::read_field(h, "harris", "score_threshold", cfg.harris.score_threshold);
    }
    if (root.contains("pipeline")) {
        const json& p = root.at("pipeline");
        detail::check_keys(p, "pipeline", {"lut_period_events", "lut_period_us"});
        detail::read_field(p, "pipeline", "lut_period_events", cfg.lut_period_events);
        detail::read_field(p, "pipeline", "lut_period_us", cfg.lut_period_us);
    }
    if (root.contains("hw")) {
        const json& h = root.at("hw");
        detail::check_keys(h, "hw", {"op_table", "dvfs_window_us", "headroom", "dvfs"});
        detail::read_field(h, "hw", "op_table", cfg.op_table_path);
        detail::read_field(h, "hw", "dvfs_window_us", cfg.dvfs_window_us);
        detail::read_field(h, "hw", "headroom", cfg.headroom);
        detail::read_field(h, "hw", "dvfs", cfg.dvfs);
    }
    if (root.contains("fault")) {
        const json& f = root.at("fault");
        detail::check_keys(f, "fault", {"ber", "per_word"});
        detail::read_field(f, "fault", "ber", cfg.ber);
        detail::read_field(f, "fault", "per_word", cfg.fault_per_word);
        if (cfg.ber < 0.0 || cfg.ber > 1.0) throw config_error("config: fault.ber must be in [0,1]");
    }
    if (root.contains("scene")) {
        const json& s = root.at("scene");
        detail::check_keys(s, "scene",
                           {"sides", "radius_px", "duration_us", "rate_eps", "rot_period_us",
                            "trans_amp_px", "trans_period_us", "jitter_lambda"});
        detail::read_field(s, "scene", "sides", cfg.scene.sides);
        detail::read_field(s, "scene", "radius_px", cfg.scene.radius_px);
        detail::read_field(s, "scene", "duration_us", cfg.scene.duration_us);
        detail::read_field(s, "scene", "rate_eps", cfg.scene.rate_eps);
        detail::read_field(s, "scene", "rot_period_us", cfg.scene.rot_period_us);
        detail::read_field(s, "scene", "trans_amp_px", cfg.scene.trans_amp_px);
        detail::read_field(s, "scene", "trans_period_us", cfg.scene.trans_period_us);
        detail::read_field(s, "scene", "jitter_lambda", cfg.scene.jitter_lambda);
    }
    if (root.contains("eval")) {
        const json& e = root.at("eval");
        detail::check_keys(e, "eval", {"gt_tolerance_px"});
        detail::read_field(e, "eval", "gt_tolerance_px", cfg.gt_tolerance_px);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& err) {
        throw config_error("config: invalid JSON in " + path + ": " + err.what());
    }
    return run_config_from_json(root);
}

// Fully resolved configuration, embedded verbatim in every report so a run
// can be reproduced from its own output.
inline json run_config_to_json(const RunConfig& cfg) {
    json root;
    root["geometry"] = {{"width", cfg.geometry.width}, {"height", cfg.geometry.height}};
    root["seed"] = cfg.seed;
    root["stcf"] = {{"enabled", cfg.stcf_enabled},
                    {"window_us", cfg.stcf.window_us},
                    {"support", cfg.stcf.support},
                    {"radius", cfg.stcf.radius}};
    root["tos"] = {{"patch", cfg.tos.patch},
                   {"threshold", cfg.tos.threshold},
                   {"mode", tos_mode_to_string(cfg.tos.mode)},
                   {"decode_zero_as_224", cfg.tos.decode_zero_as_224},
                   {"per_polarity", cfg.per_polarity}};
    root["harris"] = {{"sobel_aperture", cfg.harris.sobel_aperture},
                      {"window_aperture", cfg.harris.window_aperture},
                      {"k", cfg.harris.k},
                      {"score_threshold", cfg.harris.score_threshold}};
    root["pipeline"] = {{"lut_period_events", cfg.lut_period_events},
                        {"lut_period_us", cfg.lut_period_us}};
    root["hw"] = {{"op_table", cfg.op_table_path},
                  {"dvfs_window_us", cfg.dvfs_window_us},
                  {"headroom", cfg.headroom},
                  {"dvfs", cfg.dvfs}};
    root["fault"] = {{"ber", cfg.ber}, {"per_word", cfg.fault_per_word}};
    root["scene"] = {{"sides", cfg.scene.sides},
                     {"radius_px", cfg.scene.radius_px},
                     {"duration_us", cfg.scene.duration_us},
                     {"rate_eps", cfg.scene.rate_eps},
                     {"rot_period_us", cfg.scene.rot_period_us},
                     {"trans_amp_px", cfg.scene.trans_amp_px},
                     {"trans_period_us", cfg.scene.trans_period_us},
                     {"jitter_lambda", cfg.scene.jitter_lambda}};
    root["eval"] = {{"gt_tolerance_px", cfg.gt_tolerance_px}};
    return root;
}

// Operating-point table file: JSON array of {vdd, latency_ns, energy_pj,
// ber}; throughput is derived when absent.
inline std::vector<OperatingPoint> op_table_from_json(const json& arr) {
    if (!arr.is_array()) throw config_error("op table: expected a JSON array");
    std::vector<OperatingPoint> table;
    for (const json& row : arr) {
        detail::check_keys(row, "op_table[]",
                           {"vdd", "latency_ns", "energy_pj", "ber", "throughput_meps"});
        OperatingPoint op;
        detail::read_field(row, "op_table[]", "vdd", op.vdd);
        detail::read_field(row, "op_table[]", "latency_ns", op.latency_ns);
        detail::read_field(row, "op_table[]", "energy_pj", op.energy_pj);
        detail::read_field(row, "op_table[]", "ber", op.ber);
        op.throughput_meps = op.latency_ns > 0 ? 1000.0 / op.latency_ns : 0.0;
        detail::read_field(row, "op_table[]", "throughput_meps", op.throughput_meps);
        table.push_back(op);
    }
    std::sort(table.begin(), table.end(),
              [](const OperatingPoint& a, const OperatingPoint& b) { return a.vdd < b.vdd; });
    validate_op_table(table);
    return table;
}

inline std::vector<OperatingPoint> load_op_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open op table file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& err) {
        throw config_error("op table: invalid JSON in " + path + ": " + err.what());
    }
    return op_table_from_json(root);
}

inline json op_table_to_json(std::span<const OperatingPoint> table) {
    json arr = json::array();
    for (const auto& op : table)
        arr.push_back({{"vdd", op.vdd},
                       {"latency_ns", op.latency_ns},
                       {"energy_pj", op.energy_pj},
                       {"throughput_meps", op.throughput_meps},
                       {"ber", op.ber}});
    return arr;
}

inline HwConfig hw_config_from(const RunConfig& cfg) {
    HwConfig hw;
    if (!cfg.op_table_path.empty()) hw.table = load_op_table(cfg.op_table_path);
    hw.dvfs_window_us = cfg.dvfs_window_us;
    hw.headroom = cfg.headroom;
    hw.dvfs = cfg.dvfs;
    return hw;
}

}  // namespace evtos
