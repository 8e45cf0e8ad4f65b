#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "evtos/core.hpp"

// Spatio-temporal correlation filter: an event is signal when enough of its
// neighbors fired recently, otherwise it is background-activity noise.

namespace evtos {

struct StcfConfig {
    int64_t window_us = 5000;  // correlation time window
    int support = 2;           // minimum correlated neighbor pixels
    int radius = 1;            // Chebyshev neighborhood radius

    void validate() const {
        if (window_us <= 0) throw config_error("stcf.window_us must be > 0");
        if (support < 1) throw config_error("stcf.support must be >= 1");
        if (radius < 1) throw config_error("stcf.radius must be >= 1");
    }
};

// Per-pixel last-event timestamp. Entries only ever increase.
class TimestampMap {
  public:
    static constexpr int64_t kNever = -1;

    explicit TimestampMap(SensorGeometry geom)
        : geom_(geom), last_(size_t(geom.pixels()), kNever) {}

    int64_t at(int x, int y) const { return last_[size_t(y) * geom_.width + x]; }

    void record(int x, int y, int64_t t) {
        int64_t& slot = last_[size_t(y) * geom_.width + x];
        slot = std::max(slot, t);
    }

    const SensorGeometry& geometry() const { return geom_; }

  private:
    SensorGeometry geom_;
    std::vector<int64_t> last_;
};

// Counts distinct neighbor pixels (center excluded) whose last event is
// within the window. The verdict does not gate the state update: noise
// events still stamp the map, so correlation chains survive through them.
inline bool stcf_accept(const Event& e, TimestampMap& state, const StcfConfig& cfg) {
    const SensorGeometry& geom = state.geometry();
    const int64_t cutoff = e.t - cfg.window_us;
    const int x0 = std::max(0, e.x - cfg.radius);
    const int x1 = std::min(geom.width - 1, e.x + cfg.radius);
    const int y0 = std::max(0, e.y - cfg.radius);
    const int y1 = std::min(geom.height - 1, e.y + cfg.radius);
    int supporters = 0;
    for (int y = y0; y <= y1 && supporters < cfg.support; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (x == e.x && y == e.y) continue;
            const int64_t ts = state.at(x, y);
            if (ts != TimestampMap::kNever && ts >= cutoff) {
                if (++supporters >= cfg.support) break;
            }
        }
    }
    state.record(e.x, e.y, e.t);
    return supporters >= cfg.support;
}

class StcfFilter {
  public:
    StcfFilter(SensorGeometry geom, StcfConfig cfg) : cfg_(cfg), state_(geom) {
        geom.validate();
        cfg.validate();
    }

    bool accept(const Event& e) { return stcf_accept(e, state_, cfg_); }

    const StcfConfig& config() const { return cfg_; }

  private:
    StcfConfig cfg_;
    TimestampMap state_;
};

// Order-preserving subsequence of the accepted events.
inline std::vector<Event> filter_stream(std::span<const Event> events, SensorGeometry geom,
                                        const StcfConfig& cfg) {
    StcfFilter filter(geom, cfg);
    std::vector<Event> kept;
    for (const Event& e : events)
        if (filter.accept(e)) kept.push_back(e);
    return kept;
}

}  // namespace evtos
