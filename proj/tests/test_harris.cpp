#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evtos/harris.hpp"

#include "harris_reference.hpp"
#include "test_util.hpp"

using namespace evtos;

namespace {

TosFrame random_frame(SensorGeometry geom, uint64_t seed) {
    Rng rng(seed);
    TosFrame frame{geom, std::vector<uint8_t>(size_t(geom.pixels()))};
    for (auto& v : frame.values) {
        // TOS-like content: zeros and values in [225, 255].
        v = rng.next_bool(0.6) ? 0 : uint8_t(225 + rng.next_below(31));
    }
    return frame;
}

TosFrame square_frame(SensorGeometry geom, int x0, int y0, int side) {
    TosFrame frame{geom, std::vector<uint8_t>(size_t(geom.pixels()), 0)};
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) frame.values[size_t(y) * geom.width + x] = 255;
    return frame;
}

bool scores_close(const HarrisLut& a, const HarrisLut& b, double rel) {
    double max_mag = 0.0;
    for (double s : a.scores) max_mag = std::max(max_mag, std::abs(s));
    for (size_t i = 0; i < a.scores.size(); ++i)
        if (std::abs(a.scores[i] - b.scores[i]) > rel * std::max(1e-30, max_mag)) return false;
    return true;
}

}  // namespace

TEST_CASE("sobel kernels follow the binomial construction") {
    CHECK(sobel_smooth_kernel(3) == std::vector<double>{1, 2, 1});
    CHECK(sobel_deriv_kernel(3) == std::vector<double>{-1, 0, 1});
    CHECK(sobel_smooth_kernel(5) == std::vector<double>{1, 4, 6, 4, 1});
    CHECK(sobel_deriv_kernel(5) == std::vector<double>{-1, -2, 0, 2, 1});
    CHECK(sobel_smooth_kernel(7) == std::vector<double>{1, 6, 15, 20, 15, 6, 1});
    CHECK(sobel_deriv_kernel(7) == std::vector<double>{-1, -4, -5, 0, 5, 4, 1});
}

TEST_CASE("config validation") {
    HarrisConfig bad;
    bad.sobel_aperture = 4;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = HarrisConfig{};
    bad.k = 0.3;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = HarrisConfig{};
    bad.window_aperture = 1;
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("constant frames give all-zero scores") {
    const SensorGeometry geom{32, 32};
    for (uint8_t fill : {uint8_t(0), uint8_t(255), uint8_t(230)}) {
        TosFrame frame{geom, std::vector<uint8_t>(size_t(geom.pixels()), fill)};
        const HarrisLut lut = harris_lut(frame, HarrisConfig{});
        // Zero up to the rounding residue of the cancelling kernel taps.
        for (double s : lut.scores) CHECK(std::abs(s) < 1e-30);
    }
}

TEST_CASE("scores match the dense reference on random frames") {
    const SensorGeometry geom{64, 64};
    const HarrisConfig cfg{};
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const TosFrame frame = random_frame(geom, seed);
        const HarrisLut fast = harris_lut(frame, cfg);
        const HarrisLut slow = evtos_test::harris_reference(frame, cfg);
        CHECK(scores_close(fast, slow, 1e-9));
    }
}

TEST_CASE("reference agreement holds for other apertures") {
    const SensorGeometry geom{48, 48};
    HarrisConfig cfg;
    cfg.sobel_aperture = 3;
    cfg.window_aperture = 7;
    const TosFrame frame = random_frame(geom, 42);
    CHECK(scores_close(harris_lut(frame, cfg), evtos_test::harris_reference(frame, cfg), 1e-9));
}

TEST_CASE("the maximum response sits on the square's corners") {
    const SensorGeometry geom{64, 64};
    const int x0 = 20, y0 = 24, side = 20;
    const TosFrame frame = square_frame(geom, x0, y0, side);
    const HarrisLut lut = harris_lut(frame, HarrisConfig{});

    const double corner_xs[] = {double(x0), double(x0 + side - 1)};
    const double corner_ys[] = {double(y0), double(y0 + side - 1)};
    double best = -1e300;
    int bx = -1, by = -1;
    for (int y = 0; y < geom.height; ++y) {
        for (int x = 0; x < geom.width; ++x) {
            if (lut.at(x, y) > best) {
                best = lut.at(x, y);
                bx = x;
                by = y;
            }
        }
    }
    CHECK(best > 0.0);
    bool near_corner = false;
    for (double cx : corner_xs)
        for (double cy : corner_ys)
            if (std::abs(bx - cx) <= 1 && std::abs(by - cy) <= 1) near_corner = true;
    CHECK(near_corner);

    // Each of the four corners carries a strong local response.
    for (double cx : corner_xs) {
        for (double cy : corner_ys) {
            double local = -1e300;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    local = std::max(local, lut.at(int(cx) + dx, int(cy) + dy));
            CHECK(local > 0.5 * best);
        }
    }
}

TEST_CASE("a step edge scores non-positive along its interior") {
    const SensorGeometry geom{64, 64};
    TosFrame frame{geom, std::vector<uint8_t>(size_t(geom.pixels()), 0)};
    for (int y = 0; y < geom.height; ++y)
        for (int x = 32; x < geom.width; ++x) frame.values[size_t(y) * geom.width + x] = 255;
    const HarrisLut lut = harris_lut(frame, HarrisConfig{});
    for (int y = 10; y < 54; ++y)
        for (int x = 30; x <= 34; ++x) CHECK(lut.at(x, y) <= 1e-12);
}

TEST_CASE("classification thresholds bound the outcome") {
    const SensorGeometry geom{32, 32};
    const TosFrame frame = random_frame(geom, 3);
    HarrisConfig cfg;
    const HarrisLut lut = harris_lut(frame, cfg);
    const Event e{16, 16, true, 0};
    cfg.score_threshold = 1e300;
    CHECK_FALSE(classify_event(e, lut, cfg).is_corner);
    cfg.score_threshold = -1e300;
    CHECK(classify_event(e, lut, cfg).is_corner);
}

TEST_CASE("classification is a pure lookup: permuting events permutes outputs") {
    const SensorGeometry geom{32, 32};
    const HarrisLut lut = harris_lut(random_frame(geom, 9), HarrisConfig{});
    HarrisConfig cfg;
    cfg.score_threshold = 0.0;
    std::vector<Event> events;
    Rng rng(5);
    for (int i = 0; i < 100; ++i)
        events.push_back(Event{int(rng.next_below(32)), int(rng.next_below(32)), true, i});
    std::vector<Classification> forward;
    for (const Event& e : events) forward.push_back(classify_event(e, lut, cfg));
    for (size_t i = 0; i < events.size(); ++i) {
        const size_t j = events.size() - 1 - i;
        const Classification c = classify_event(events[j], lut, cfg);
        CHECK(c.score == forward[j].score);
        CHECK(c.is_corner == forward[j].is_corner);
    }
}

TEST_CASE("borders stay at score zero") {
    const SensorGeometry geom{32, 32};
    const HarrisConfig cfg{};
    const HarrisLut lut = harris_lut(random_frame(geom, 21), cfg);
    const int margin = cfg.border_margin();
    for (int y = 0; y < geom.height; ++y) {
        for (int x = 0; x < geom.width; ++x) {
            if (x < margin || y < margin || x >= geom.width - margin || y >= geom.height - margin)
                CHECK(lut.at(x, y) == 0.0);
        }
    }
}

TEST_CASE("score map round-trips through the dump format") {
    const SensorGeometry geom{16, 12};
    const HarrisLut lut = harris_lut(random_frame(geom, 8), HarrisConfig{}, 42);
    const auto path = evtos_test::temp_file("scores");
    write_score_map(path.string(), lut);
    const HarrisLut back = read_score_map(path.string());
    CHECK(back.geom == geom);
    CHECK(back.frame_index == 42);
    for (size_t i = 0; i < lut.scores.size(); ++i)
        CHECK(back.scores[i] == doctest::Approx(lut.scores[i]).epsilon(1e-6));
}
