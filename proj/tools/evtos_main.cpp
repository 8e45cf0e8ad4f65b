// Command-line front end for the event-camera corner pipeline and the
// near-memory hardware model. Subcommands: filter, detect, simulate,
// dvfs-trace, eval, render-tos. Exit codes: 0 success, 2 configuration
// error, 3 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evtos/config.hpp"
#include "evtos/denoise.hpp"
#include "evtos/eval.hpp"
#include "evtos/events.hpp"
#include "evtos/harris.hpp"
#include "evtos/hwmodel.hpp"
#include "evtos/pipeline.hpp"
#include "evtos/scene.hpp"
#include "evtos/tos.hpp"

namespace fs = std::filesystem;
using namespace evtos;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string geometry;  // "WxH"
    std::string output_dir = ".";
    std::optional<uint64_t> seed;
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--geometry", opts.geometry, "sensor geometry WxH (overrides config)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
    cmd->add_option("--output-dir", opts.output_dir, "directory for output files");
    cmd->add_flag("--serial", opts.serial, "force strictly sequential execution");
}

SensorGeometry parse_geometry(const std::string& text) {
    const size_t x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= text.size())
        throw config_error("--geometry expects WxH, got \"" + text + "\"");
    SensorGeometry geom;
    try {
        geom.width = std::stoi(text.substr(0, x));
        geom.height = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw config_error("--geometry expects WxH, got \"" + text + "\"");
    }
    geom.validate();
    return geom;
}

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
    if (!opts.geometry.empty()) cfg.geometry = parse_geometry(opts.geometry);
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.geometry.validate();
    return cfg;
}

fs::path out_path(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.output_dir);
    return fs::path(opts.output_dir) / name;
}

std::vector<Event> load_input(const std::string& input, const std::string& synthetic,
                              const RunConfig& cfg) {
    if (!synthetic.empty()) {
        const auto profile = parse_rate_profile(synthetic);
        return synth_stream(profile, cfg.geometry, derive_seed(cfg.seed, "synth"));
    }
    if (input.empty()) throw config_error("either --input or --synthetic is required");
    return load_events(input, cfg.geometry);
}

void write_json(const fs::path& path, const json& value) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open output file: " + path.string());
    out << value.dump(2) << '\n';
    if (!out) throw data_error("I/O error while writing " + path.string());
}

std::optional<FaultModel> make_fault(const RunConfig& cfg) {
    if (cfg.ber <= 0.0) return std::nullopt;
    return FaultModel(cfg.ber, derive_seed(cfg.seed, "fault"), cfg.fault_per_word);
}

// ---------------------------------------------------------------- filter --

struct FilterOpts {
    CommonOpts common;
    std::string input;
    std::string output = "filtered.txt";
};

int cmd_filter(const FilterOpts& opts) {
    const RunConfig cfg = resolve_config(opts.common);
    cfg.stcf.validate();
    EventReader reader(opts.input, cfg.geometry);
    StcfFilter filter(cfg.geometry, cfg.stcf);
    const fs::path out_file = out_path(opts.common, opts.output);
    std::ofstream out(out_file);
    if (!out) throw data_error("cannot open output file: " + out_file.string());
    size_t kept = 0;
    while (auto e = reader.next()) {
        if (filter.accept(*e)) {
            out << format_event_line(*e) << '\n';
            ++kept;
        }
    }
    if (!out) throw data_error("I/O error while writing " + out_file.string());
    std::cout << "kept " << kept << " of " << reader.events_read() << "\n";
    return 0;
}

// ---------------------------------------------------------------- detect --

struct DetectOpts {
    CommonOpts common;
    std::string input;
    std::string synthetic;
    std::string output = "detections.csv";
    std::string tos_mode;
    std::optional<double> ber;
    std::string dump_frame;   // final decoded TOS frame as PGM
    std::string dump_scores;  // final Harris map
};

int cmd_detect(const DetectOpts& opts) {
    RunConfig cfg = resolve_config(opts.common);
    if (!opts.tos_mode.empty()) cfg.tos.mode = tos_mode_from_string(opts.tos_mode);
    if (opts.ber) cfg.ber = *opts.ber;
    if (cfg.ber < 0.0 || cfg.ber > 1.0) throw config_error("--ber must be in [0,1]");

    const std::vector<Event> events = load_input(opts.input, opts.synthetic, cfg);
    auto fault = make_fault(cfg);
    Pipeline pipeline(cfg.pipeline_config(), fault ? &*fault : nullptr);

    const fs::path out_file = out_path(opts.common, opts.output);
    std::ofstream out(out_file);
    if (!out) throw data_error("cannot open output file: " + out_file.string());
    out << detections_csv_header() << '\n';
    size_t corners = 0, accepted = 0;
    for (const Event& e : events) {
        if (auto d = pipeline.process(e)) {
            out << format_detection_row(*d) << '\n';
            ++accepted;
            corners += d->is_corner ? 1 : 0;
        }
    }
    if (!out) throw data_error("I/O error while writing " + out_file.string());

    if (!opts.dump_frame.empty())
        write_pgm(out_path(opts.common, opts.dump_frame).string(), pipeline.surface().snapshot());
    if (!opts.dump_scores.empty())
        write_score_map(out_path(opts.common, opts.dump_scores).string(), pipeline.lut());

    std::cout << "accepted " << accepted << " of " << events.size() << ", corners " << corners
              << ", luts " << (pipeline.frame_index() + 1) << "\n";
    return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateOpts {
    CommonOpts common;
    std::string input;
    std::string synthetic;
    std::string output = "report.json";
    std::string op_table;
    bool no_dvfs = false;
    bool no_stcf = false;
};

json hw_report(const HardwareSim& sim, size_t input_events, size_t accepted, int patch) {
    const EnergyLedger& ledger = sim.ledger();
    const Baseline base = conventional_baseline(patch);
    json report;
    report["events"] = {{"input", input_events},
                        {"accepted", accepted},
                        {"processed", ledger.processed()},
                        {"dropped", ledger.dropped()}};
    report["energy"] = {{"total_pj", ledger.energy_pj()},
                        {"average_power_mw", ledger.average_power_mw()},
                        {"busy_ns", ledger.busy_ns()},
                        {"wall_us", ledger.wall_us()}};
    json hist = json::array();
    const auto& table = sim.table();
    for (size_t i = 0; i < table.size(); ++i)
        hist.push_back({{"vdd", table[i].vdd}, {"events", ledger.per_point()[i]}});
    report["histogram"] = hist;
    report["op_table"] = op_table_to_json(table);
    report["baseline"] = {{"latency_ns", base.latency_ns},
                          {"energy_pj", base.energy_pj},
                          {"throughput_meps", base.throughput_meps}};
    const OperatingPoint& max_sel = sim.max_selected_point();
    report["speedup_vs_conventional"] = base.latency_ns / max_sel.latency_ns;
    report["selected_max"] = {{"vdd", max_sel.vdd},
                              {"latency_ns", max_sel.latency_ns},
                              {"energy_pj", max_sel.energy_pj},
                              {"throughput_meps", max_sel.throughput_meps}};
    json per_point = json::array();
    for (const auto& op : table)
        per_point.push_back({{"vdd", op.vdd},
                             {"throughput_meps", op.throughput_meps},
                             {"speedup_vs_conventional", base.latency_ns / op.latency_ns},
                             {"energy_ratio_vs_conventional", base.energy_pj / op.energy_pj}});
    report["comparison_per_point"] = per_point;
    json breakdown;
    for (const auto& [name, share] : kPowerBreakdown) breakdown[name] = share;
    report["power_breakdown_at_1v2"] = breakdown;
    report["overloaded"] = sim.overloaded();
    return report;
}

int cmd_simulate(const SimulateOpts& opts) {
    RunConfig cfg = resolve_config(opts.common);
    if (!opts.op_table.empty()) cfg.op_table_path = opts.op_table;
    if (opts.no_dvfs) cfg.dvfs = false;
    if (opts.no_stcf) cfg.stcf_enabled = false;

    const std::vector<Event> events = load_input(opts.input, opts.synthetic, cfg);
    HwConfig hw = hw_config_from(cfg);
    HardwareSim sim(hw);
    std::optional<StcfFilter> stcf;
    if (cfg.stcf_enabled) stcf.emplace(cfg.geometry, cfg.stcf);
    size_t accepted = 0;
    for (const Event& e : events) {
        if (stcf && !stcf->accept(e)) continue;
        ++accepted;
        sim.on_event(e.t);
    }

    json report = hw_report(sim, events.size(), accepted, cfg.tos.patch);
    report["config"] = run_config_to_json(cfg);
    report["sram_blocks"] = sram_block_count(cfg.geometry);
    write_json(out_path(opts.common, opts.output), report);
    std::cout << "energy " << sim.ledger().energy_pj() << " pJ, avg power "
              << sim.ledger().average_power_mw() << " mW, dropped " << sim.ledger().dropped()
              << "\n";
    return 0;
}

// ------------------------------------------------------------ dvfs-trace --

struct TraceOpts {
    CommonOpts common;
    std::string input;
    std::string synthetic;
    std::string output = "dvfs_trace.csv";
    bool no_stcf = false;
};

int cmd_dvfs_trace(const TraceOpts& opts) {
    RunConfig cfg = resolve_config(opts.common);
    if (opts.no_stcf) cfg.stcf_enabled = false;
    const std::vector<Event> events = load_input(opts.input, opts.synthetic, cfg);
    HwConfig hw = hw_config_from(cfg);
    hw.collect_trace = true;
    HardwareSim sim(hw);
    std::optional<StcfFilter> stcf;
    if (cfg.stcf_enabled) stcf.emplace(cfg.geometry, cfg.stcf);
    for (const Event& e : events) {
        if (stcf && !stcf->accept(e)) continue;
        sim.on_event(e.t);
    }
    const fs::path out_file = out_path(opts.common, opts.output);
    std::ofstream out(out_file);
    if (!out) throw data_error("cannot open output file: " + out_file.string());
    out << "t_us,f_e_meps,vdd,capacity_meps,overload\n";
    char buf[128];
    for (const DvfsTraceRow& row : sim.trace()) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%d",
                      static_cast<long long>(row.t_us), row.f_e_meps, row.vdd, row.capacity_meps,
                      row.overload ? 1 : 0);
        out << buf << '\n';
    }
    if (!out) throw data_error("I/O error while writing " + out_file.string());
    std::cout << "trace rows " << sim.trace().size() << "\n";
    return 0;
}

// ------------------------------------------------------------------ eval --

struct EvalOpts {
    CommonOpts common;
    std::string input;
    bool synthetic = false;
    std::string ber_list = "0,0.002,0.025";
    std::string output = "pr_report.json";
};

std::vector<double> parse_ber_list(const std::string& text) {
    std::vector<double> bers;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        if (!tok.empty()) {
            double v = 0;
            try {
                v = std::stod(tok);
            } catch (const std::exception&) {
                throw config_error("--ber: bad value \"" + tok + "\"");
            }
            if (v < 0.0 || v > 1.0) throw config_error("--ber: values must be in [0,1]");
            bers.push_back(v);
        }
        pos = comma + 1;
    }
    if (bers.empty()) throw config_error("--ber: empty list");
    return bers;
}

std::string ber_tag(double ber) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", ber);
    std::string tag(buf);
    for (char& c : tag)
        if (c == '.') c = 'p';
    return tag;
}

int cmd_eval(const EvalOpts& opts) {
    const RunConfig cfg = resolve_config(opts.common);
    const std::vector<double> bers = parse_ber_list(opts.ber_list);

    std::vector<Event> events;
    std::vector<bool> labels;
    const std::vector<bool>* labels_ptr = nullptr;
    std::optional<PolygonScene> scene;
    if (opts.synthetic) {
        scene.emplace(cfg.scene_config());
        events = scene->events();
    } else {
        if (opts.input.empty()) throw config_error("either --input or --synthetic is required");
        events = load_events(opts.input, cfg.geometry);
    }

    PipelineConfig pipe_cfg = cfg.pipeline_config();
    if (scene) {
        // Labels align with accepted events, so filter first, label after.
        const std::vector<Event> accepted =
            pipe_cfg.stcf_enabled ? filter_stream(events, cfg.geometry, cfg.stcf) : events;
        labels = ground_truth_labels(accepted, *scene, cfg.gt_tolerance_px);
        labels_ptr = &labels;
    }

    const uint64_t eval_seed = derive_seed(cfg.seed, "eval-fault");
    const BerReport result = ber_experiment(events, pipe_cfg, bers, eval_seed, labels_ptr, 0.99,
                                            !opts.common.serial);

    json report;
    report["config"] = run_config_to_json(cfg);
    report["labels"] = scene ? "synthetic-scene-corners" : "pseudo-from-clean-run-p99";
    report["auc_convention"] = "trapezoid over achieved recall range, no extrapolation";
    report["clean_auc"] = result.clean_auc;
    report["seeds"] = {{"master", cfg.seed}, {"eval_fault_base", eval_seed}};
    json runs = json::array();
    for (const BerRun& run : result.runs) {
        json curve = json::array();
        for (const PrPoint& p : run.curve.points) curve.push_back({p.recall, p.precision});
        runs.push_back({{"ber", run.ber},
                        {"fault_seed", run.fault_seed},
                        {"auc", run.auc},
                        {"delta_auc", run.delta_auc},
                        {"curve", curve}});
    }
    report["runs"] = runs;
    write_json(out_path(opts.common, opts.output), report);

    write_pgm(out_path(opts.common, "tos_clean.pgm").string(), result.clean_frame);
    for (const BerRun& run : result.runs) {
        const std::string tag = ber_tag(run.ber);
        write_pgm(out_path(opts.common, "tos_ber" + tag + ".pgm").string(), run.final_frame);
        const fs::path curve_file = out_path(opts.common, "curve_ber" + tag + ".csv");
        std::ofstream out(curve_file);
        if (!out) throw data_error("cannot open output file: " + curve_file.string());
        out << "threshold,recall,precision\n";
        char buf[96];
        for (const PrPoint& p : run.curve.points) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", p.threshold, p.recall, p.precision);
            out << buf << '\n';
        }
        std::cout << "ber " << run.ber << ": auc " << run.auc << " (delta " << run.delta_auc
                  << ")\n";
    }
    return 0;
}

// ------------------------------------------------------------ render-tos --

struct RenderOpts {
    CommonOpts common;
    std::string input;
    std::string synthetic;
    std::string output = "tos.pgm";
    int64_t every = 0;  // also dump every N accepted events
};

int cmd_render_tos(const RenderOpts& opts) {
    RunConfig cfg = resolve_config(opts.common);
    const std::vector<Event> events = load_input(opts.input, opts.synthetic, cfg);
    auto fault = make_fault(cfg);
    std::optional<StcfFilter> stcf;
    if (cfg.stcf_enabled) stcf.emplace(cfg.geometry, cfg.stcf);
    TosSurface surface(cfg.geometry, cfg.tos);
    int64_t accepted = 0;
    int frame = 0;
    for (const Event& e : events) {
        if (stcf && !stcf->accept(e)) continue;
        surface.update(e, fault ? &*fault : nullptr);
        ++accepted;
        if (opts.every > 0 && accepted % opts.every == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "tos_%05d.pgm", frame++);
            write_pgm(out_path(opts.common, name).string(), surface.snapshot());
        }
    }
    write_pgm(out_path(opts.common, opts.output).string(), surface.snapshot());
    std::cout << "rendered " << accepted << " accepted events\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera corner detection pipeline and near-memory hardware model"};
    app.require_subcommand(1);

    FilterOpts filter_opts;
    CLI::App* filter = app.add_subcommand("filter", "denoise an event stream");
    add_common(filter, filter_opts.common);
    filter->add_option("--input", filter_opts.input, "input event file")->required();
    filter->add_option("--output", filter_opts.output, "filtered stream file name");

    DetectOpts detect_opts;
    CLI::App* detect = app.add_subcommand("detect", "run the corner detection pipeline");
    add_common(detect, detect_opts.common);
    detect->add_option("--input", detect_opts.input, "input event file");
    detect->add_option("--synthetic", detect_opts.synthetic,
                       "synthesize input, profile dur_us:rate_eps[,...]");
    detect->add_option("--output", detect_opts.output, "detections CSV file name");
    detect->add_option("--tos-mode", detect_opts.tos_mode, "quantized|reference");
    detect->add_option("--ber", detect_opts.ber, "write-back bit error rate");
    detect->add_option("--dump-frame", detect_opts.dump_frame, "write final TOS frame (PGM)");
    detect->add_option("--dump-scores", detect_opts.dump_scores, "write final Harris map");

    SimulateOpts sim_opts;
    CLI::App* simulate = app.add_subcommand("simulate", "hardware timing/energy simulation");
    add_common(simulate, sim_opts.common);
    simulate->add_option("--input", sim_opts.input, "input event file");
    simulate->add_option("--synthetic", sim_opts.synthetic,
                         "synthesize input, profile dur_us:rate_eps[,...]");
    simulate->add_option("--output", sim_opts.output, "report JSON file name");
    simulate->add_option("--op-table", sim_opts.op_table, "operating point table JSON file");
    simulate->add_flag("--no-dvfs", sim_opts.no_dvfs, "pin the top operating point");
    simulate->add_flag("--no-stcf", sim_opts.no_stcf, "skip the denoising stage");

    TraceOpts trace_opts;
    CLI::App* trace = app.add_subcommand("dvfs-trace", "rate estimates and point selection CSV");
    add_common(trace, trace_opts.common);
    trace->add_option("--input", trace_opts.input, "input event file");
    trace->add_option("--synthetic", trace_opts.synthetic,
                      "synthesize input, profile dur_us:rate_eps[,...]");
    trace->add_option("--output", trace_opts.output, "trace CSV file name");
    trace->add_flag("--no-stcf", trace_opts.no_stcf, "skip the denoising stage");

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "precision-recall fault-impact evaluation");
    add_common(eval, eval_opts.common);
    eval->add_option("--input", eval_opts.input, "input event file");
    eval->add_flag("--synthetic", eval_opts.synthetic, "use the configured synthetic scene");
    eval->add_option("--ber", eval_opts.ber_list, "comma-separated bit error rates");
    eval->add_option("--output", eval_opts.output, "report JSON file name");

    RenderOpts render_opts;
    CLI::App* render = app.add_subcommand("render-tos", "render the TOS to PGM images");
    add_common(render, render_opts.common);
    render->add_option("--input", render_opts.input, "input event file");
    render->add_option("--synthetic", render_opts.synthetic,
                       "synthesize input, profile dur_us:rate_eps[,...]");
    render->add_option("--output", render_opts.output, "final frame file name");
    render->add_option("--every", render_opts.every, "also dump every N accepted events");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(filter)) return cmd_filter(filter_opts);
        if (app.got_subcommand(detect)) return cmd_detect(detect_opts);
        if (app.got_subcommand(simulate)) return cmd_simulate(sim_opts);
        if (app.got_subcommand(trace)) return cmd_dvfs_trace(trace_opts);
        if (app.got_subcommand(eval)) return cmd_eval(eval_opts);
        if (app.got_subcommand(render)) return cmd_render_tos(render_opts);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
