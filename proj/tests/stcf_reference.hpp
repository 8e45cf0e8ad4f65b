#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "evtos/core.hpp"
#include "evtos/denoise.hpp"

// Brute-force spatio-temporal correlation filter: for every event, one
// backward scan over the in-window slice of the stream collects the
// distinct neighbor pixels seen there. A pixel whose most recent firing is
// older than the window is never reached, which is exactly "not a
// supporter". O(N * window), used only as an oracle.

namespace evtos_test {

inline std::vector<evtos::Event> stcf_reference(std::span<const evtos::Event> events,
                                                evtos::SensorGeometry geom,
                                                const evtos::StcfConfig& cfg) {
    std::vector<evtos::Event> kept;
    std::vector<int64_t> seen;  // packed neighbor pixel ids, tiny per event
    for (size_t i = 0; i < events.size(); ++i) {
        const evtos::Event& e = events[i];
        seen.clear();
        for (size_t j = i; j-- > 0;) {
            if (events[j].t < e.t - cfg.window_us) break;
            const int dx = events[j].x - e.x;
            const int dy = events[j].y - e.y;
            if (dx == 0 && dy == 0) continue;
            if (std::abs(dx) > cfg.radius || std::abs(dy) > cfg.radius) continue;
            const int64_t id = int64_t(events[j].y) * geom.width + events[j].x;
            if (std::find(seen.begin(), seen.end(), id) == seen.end()) seen.push_back(id);
        }
        if (int(seen.size()) >= cfg.support) kept.push_back(e);
    }
    return kept;
}

}  // namespace evtos_test
