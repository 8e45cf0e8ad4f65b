#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "evtos/core.hpp"
#include "evtos/tos.hpp"

// Closed-form surface oracle: a pixel's value is 255 minus the number of
// events whose patch covered it since it was last an event center, zeroed
// once it falls below the threshold. Independent of the incremental update
// path it checks.

namespace evtos_test {

inline std::vector<uint8_t> tos_counting_oracle(evtos::SensorGeometry geom,
                                                std::span<const evtos::Event> events,
                                                const evtos::TosConfig& cfg) {
    const int half = (cfg.patch - 1) / 2;
    std::vector<int> since_center(size_t(geom.pixels()), -1);  // -1: never a center
    std::vector<int> cover_count(size_t(geom.pixels()), 0);
    for (const evtos::Event& e : events) {
        for (int y = std::max(0, e.y - half); y <= std::min(geom.height - 1, e.y + half); ++y)
            for (int x = std::max(0, e.x - half); x <= std::min(geom.width - 1, e.x + half); ++x)
                ++cover_count[size_t(y) * geom.width + x];
        const size_t c = size_t(e.y) * geom.width + e.x;
        since_center[c] = 0;
        cover_count[c] = 0;
    }
    std::vector<uint8_t> values(size_t(geom.pixels()), 0);
    for (size_t i = 0; i < values.size(); ++i) {
        if (since_center[i] < 0) {
            values[i] = 0;
        } else {
            const int v = 255 - cover_count[i];
            values[i] = v >= cfg.threshold ? uint8_t(v) : 0;
        }
    }
    return values;
}

}  // namespace evtos_test
