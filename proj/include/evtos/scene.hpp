#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "evtos/core.hpp"

// Synthetic scene with analytically known corners: a regular polygon that
// rotates and translates across the sensor while its edges emit events with
// Poisson pixel jitter. The vertex trajectories double as ground truth for
// the precision-recall evaluation.

namespace evtos {

struct SceneConfig {
    SensorGeometry geometry{64, 64};
    int sides = 4;
    double radius_px = 20.0;
    int64_t duration_us = 300000;
    double rate_eps = 500000.0;       // total edge event rate
    double rot_period_us = 300000.0;  // one full revolution
    double trans_amp_px = 2.0;        // circular drift of the centroid
    double trans_period_us = 300000.0;
    double jitter_lambda = 0.3;       // Poisson magnitude of per-axis pixel jitter
    uint64_t seed = 1;

    void validate() const {
        geometry.validate();
        if (sides < 3) throw config_error("scene.sides must be >= 3");
        if (radius_px <= 0) throw config_error("scene.radius_px must be > 0");
        if (duration_us <= 0) throw config_error("scene.duration_us must be > 0");
        if (rate_eps <= 0) throw config_error("scene.rate_eps must be > 0");
        if (rot_period_us <= 0 || trans_period_us <= 0)
            throw config_error("scene periods must be > 0");
        const double reach = radius_px + trans_amp_px;
        if (2 * reach >= std::min(geometry.width, geometry.height))
            throw config_error("scene polygon does not fit the sensor");
    }
};

struct Point2 {
    double x = 0, y = 0;
};

class PolygonScene {
  public:
    explicit PolygonScene(SceneConfig cfg) : cfg_(cfg) { cfg.validate(); }

    Point2 center_at(int64_t t_us) const {
        const double cx = cfg_.geometry.width / 2.0;
        const double cy = cfg_.geometry.height / 2.0;
        const double phase = 2.0 * kPi * double(t_us) / cfg_.trans_period_us;
        return {cx + cfg_.trans_amp_px * std::cos(phase),
                cy + cfg_.trans_amp_px * std::sin(phase)};
    }

    std::vector<Point2> corners_at(int64_t t_us) const {
        const Point2 c = center_at(t_us);
        const double base = 2.0 * kPi * double(t_us) / cfg_.rot_period_us;
        std::vector<Point2> corners(size_t(cfg_.sides));
        for (int i = 0; i < cfg_.sides; ++i) {
            const double a = base + 2.0 * kPi * i / cfg_.sides;
            corners[size_t(i)] = {c.x + cfg_.radius_px * std::cos(a),
                                  c.y + cfg_.radius_px * std::sin(a)};
        }
        return corners;
    }

    // Events sampled uniformly along the polygon perimeter, time-ordered,
    // with seeded jitter. Deterministic for a given config.
    std::vector<Event> events() const {
        Rng rng(derive_seed(cfg_.seed, "scene-events"));
        const int64_t n = int64_t(double(cfg_.duration_us) * cfg_.rate_eps / 1e6);
        std::vector<Event> out;
        out.reserve(size_t(n));
        for (int64_t i = 0; i < n; ++i) {
            Event e;
            e.t = (i * cfg_.duration_us) / n;
            const auto corners = corners_at(e.t);
            const double u = rng.next_double() * cfg_.sides;
            const int edge = std::min(int(u), cfg_.sides - 1);
            const double f = u - edge;
            const Point2& a = corners[size_t(edge)];
            const Point2& b = corners[size_t((edge + 1) % cfg_.sides)];
            const double px = a.x + f * (b.x - a.x);
            const double py = a.y + f * (b.y - a.y);
            const int jx = rng.next_poisson(cfg_.jitter_lambda) * (rng.next_bool(0.5) ? 1 : -1);
            const int jy = rng.next_poisson(cfg_.jitter_lambda) * (rng.next_bool(0.5) ? 1 : -1);
            e.x = std::clamp(int(std::lround(px)) + jx, 0, cfg_.geometry.width - 1);
            e.y = std::clamp(int(std::lround(py)) + jy, 0, cfg_.geometry.height - 1);
            e.polarity = rng.next_bool(0.5);
            out.push_back(e);
        }
        return out;
    }

    const SceneConfig& config() const { return cfg_; }

  private:
    static constexpr double kPi = 3.14159265358979323846;
    SceneConfig cfg_;
};

}  // namespace evtos
