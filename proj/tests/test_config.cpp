#include "doctest.h"

#include "evtos/config.hpp"

#include "test_util.hpp"

using namespace evtos;
using evtos_test::temp_file;
using evtos_test::write_text;

TEST_CASE("defaults survive an empty config document") {
    const RunConfig cfg = run_config_from_json(json::object());
    CHECK(cfg.geometry.width == 240);
    CHECK(cfg.geometry.height == 180);
    CHECK(cfg.stcf.window_us == 5000);
    CHECK(cfg.stcf.support == 2);
    CHECK(cfg.tos.patch == 7);
    CHECK(cfg.tos.threshold == 225);
    CHECK(cfg.tos.mode == TosMode::Quantized);
    CHECK(cfg.harris.sobel_aperture == 5);
    CHECK(cfg.harris.k == 0.04);
    CHECK(cfg.lut_period_events == 5000);
    CHECK(cfg.dvfs_window_us == 10000);
    CHECK(cfg.dvfs);
    CHECK(cfg.ber == 0.0);
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK_THROWS_WITH_AS(run_config_from_json(json::parse(R"({"stfc": {}})")),
                         doctest::Contains("stfc"), config_error);
    CHECK_THROWS_WITH_AS(run_config_from_json(json::parse(R"({"stcf": {"windw_us": 3}})")),
                         doctest::Contains("stcf.windw_us"), config_error);
}

TEST_CASE("bad values carry the key name") {
    CHECK_THROWS_WITH_AS(run_config_from_json(json::parse(R"({"tos": {"patch": "wide"}})")),
                         doctest::Contains("tos.patch"), config_error);
    CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"fault": {"ber": 1.5}})")), config_error);
    CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"tos": {"mode": "octal"}})")),
                    config_error);
}

TEST_CASE("config round-trips through its JSON dump") {
    RunConfig cfg;
    cfg.geometry = {128, 96};
    cfg.seed = 77;
    cfg.stcf.support = 3;
    cfg.tos.mode = TosMode::Reference;
    cfg.tos.threshold = 150;
    cfg.harris.k = 0.06;
    cfg.lut_period_us = 2500;
    cfg.dvfs = false;
    cfg.ber = 0.002;
    cfg.scene.sides = 6;
    const RunConfig back = run_config_from_json(run_config_to_json(cfg));
    CHECK(back.geometry == cfg.geometry);
    CHECK(back.seed == cfg.seed);
    CHECK(back.stcf.support == cfg.stcf.support);
    CHECK(back.tos.mode == cfg.tos.mode);
    CHECK(back.tos.threshold == cfg.tos.threshold);
    CHECK(back.harris.k == cfg.harris.k);
    CHECK(back.lut_period_us == cfg.lut_period_us);
    CHECK(back.dvfs == cfg.dvfs);
    CHECK(back.ber == cfg.ber);
    CHECK(back.scene.sides == cfg.scene.sides);
}

TEST_CASE("config file loading") {
    const auto path = temp_file("config");
    write_text(path, R"({"geometry": {"width": 64, "height": 48}, "seed": 9})");
    const RunConfig cfg = load_run_config(path.string());
    CHECK(cfg.geometry.width == 64);
    CHECK(cfg.geometry.height == 48);
    CHECK(cfg.seed == 9);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), config_error);

    const auto broken = temp_file("broken");
    write_text(broken, "{not json");
    CHECK_THROWS_AS(load_run_config(broken.string()), config_error);
}

TEST_CASE("operating point tables round-trip and validate") {
    const auto table = default_op_table();
    const json dumped = op_table_to_json(table);
    const auto back = op_table_from_json(dumped);
    REQUIRE(back.size() == table.size());
    for (size_t i = 0; i < table.size(); ++i) {
        CHECK(back[i].vdd == table[i].vdd);
        CHECK(back[i].latency_ns == table[i].latency_ns);
        CHECK(back[i].energy_pj == table[i].energy_pj);
        CHECK(back[i].ber == table[i].ber);
    }

    // Rows are sorted on load, throughput derived when missing.
    const json two = json::parse(
        R"([{"vdd": 1.2, "latency_ns": 16.0, "energy_pj": 139.0, "ber": 0.0},
            {"vdd": 0.6, "latency_ns": 203.0, "energy_pj": 26.0, "ber": 0.025}])");
    const auto loaded = op_table_from_json(two);
    CHECK(loaded[0].vdd == 0.6);
    CHECK(loaded[0].throughput_meps == doctest::Approx(1000.0 / 203.0));

    CHECK_THROWS_AS(op_table_from_json(json::parse(R"([{"vdd": 0.9}])")), config_error);
    CHECK_THROWS_AS(op_table_from_json(json::parse("{}")), config_error);
}

TEST_CASE("scene seed derives from the master seed") {
    RunConfig a;
    a.seed = 1;
    RunConfig b;
    b.seed = 2;
    CHECK(a.scene_config().seed != b.scene_config().seed);
    CHECK(a.scene_config().seed == a.scene_config().seed);
}
