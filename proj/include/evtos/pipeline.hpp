#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtos/core.hpp"
#include "evtos/denoise.hpp"
#include "evtos/harris.hpp"
#include "evtos/tos.hpp"

// End-to-end event pipeline: STCF denoise -> event-by-event TOS update ->
// per-event corner lookup against the last available Harris map, which is
// refreshed from a TOS snapshot on a fixed period. Classification of one
// event never waits on a Harris pass; events seen before the first refresh
// are scored against an all-zero map.

namespace evtos {

struct PipelineConfig {
    SensorGeometry geometry{240, 180};
    bool stcf_enabled = true;
    StcfConfig stcf;
    TosConfig tos;
    HarrisConfig harris;
    // Refresh policy: every lut_period_events accepted events, or every
    // lut_period_us microseconds when that is set nonzero.
    int64_t lut_period_events = 5000;
    int64_t lut_period_us = 0;
    // Maintain one surface per polarity instead of a single shared one;
    // events are then classified against the map of their own polarity.
    bool per_polarity = false;

    void validate() const {
        geometry.validate();
        stcf.validate();
        tos.validate();
        harris.validate();
        if (lut_period_events < 1) throw config_error("pipeline.lut_period_events must be >= 1");
        if (lut_period_us < 0) throw config_error("pipeline.lut_period_us must be >= 0");
    }
};

struct Detection {
    Event event;
    double score = 0.0;
    bool is_corner = false;

    bool operator==(const Detection&) const = default;
};

class Pipeline {
  public:
    // Called at every map refresh with the snapshot that produced it.
    using RefreshHook = std::function<void(const TosFrame&, const HarrisLut&)>;

    explicit Pipeline(const PipelineConfig& cfg, FaultModel* fault = nullptr)
        : cfg_(cfg), fault_(fault) {
        cfg.validate();
        const int n_surfaces = cfg.per_polarity ? 2 : 1;
        for (int i = 0; i < n_surfaces; ++i) {
            surfaces_.emplace_back(cfg.geometry, cfg.tos);
            luts_.push_back(HarrisLut{cfg.geometry,
                                      std::vector<double>(size_t(cfg.geometry.pixels()), 0.0), -1});
        }
        if (cfg.stcf_enabled) stcf_.emplace(cfg.geometry, cfg.stcf);
    }

    void set_refresh_hook(RefreshHook hook) { hook_ = std::move(hook); }

    // Feeds one event; returns its classification, or nullopt when the
    // denoiser rejects it. Events must arrive in timestamp order.
    std::optional<Detection> process(const Event& e) {
        ++seen_;
        if (stcf_ && !stcf_->accept(e)) return std::nullopt;
        const size_t idx = surface_index(e);
        surfaces_[idx].update(e, fault_);
        ++accepted_;

        Detection d;
        d.event = e;
        const Classification c = classify_event(e, luts_[idx], cfg_.harris);
        d.score = c.score;
        d.is_corner = c.is_corner;

        if (due_for_refresh(e.t)) refresh();
        return d;
    }

    // Recomputes every per-polarity map from a fresh snapshot.
    void refresh() {
        ++frame_index_;
        for (size_t i = 0; i < surfaces_.size(); ++i) {
            const TosFrame frame = surfaces_[i].snapshot();
            luts_[i] = harris_lut(frame, cfg_.harris, frame_index_);
            if (hook_) hook_(frame, luts_[i]);
        }
    }

    const TosSurface& surface(size_t idx = 0) const { return surfaces_[idx]; }
    const HarrisLut& lut(size_t idx = 0) const { return luts_[idx]; }
    int64_t accepted() const { return accepted_; }
    int64_t seen() const { return seen_; }
    int64_t frame_index() const { return frame_index_; }

  private:
    size_t surface_index(const Event& e) const {
        return cfg_.per_polarity && e.polarity ? 1 : 0;
    }

    bool due_for_refresh(int64_t t) {
        if (cfg_.lut_period_us > 0) {
            if (next_refresh_us_ < 0) {
                next_refresh_us_ = t + cfg_.lut_period_us;
                return false;
            }
            if (t < next_refresh_us_) return false;
            while (next_refresh_us_ <= t) next_refresh_us_ += cfg_.lut_period_us;
            return true;
        }
        return accepted_ % cfg_.lut_period_events == 0;
    }

    PipelineConfig cfg_;
    FaultModel* fault_;
    std::vector<TosSurface> surfaces_;
    std::vector<HarrisLut> luts_;
    std::optional<StcfFilter> stcf_;
    RefreshHook hook_;
    int64_t seen_ = 0;
    int64_t accepted_ = 0;
    int64_t frame_index_ = -1;
    int64_t next_refresh_us_ = -1;
};

inline std::vector<Detection> run_pipeline(std::span<const Event> events,
                                           const PipelineConfig& cfg,
                                           FaultModel* fault = nullptr,
                                           Pipeline::RefreshHook hook = {}) {
    Pipeline pipeline(cfg, fault);
    if (hook) pipeline.set_refresh_hook(std::move(hook));
    std::vector<Detection> out;
    out.reserve(events.size());
    for (const Event& e : events)
        if (auto d = pipeline.process(e)) out.push_back(*d);
    return out;
}

inline std::string detections_csv_header() { return "t_us,x,y,polarity,score,is_corner"; }

inline std::string format_detection_row(const Detection& d) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%d,%.9g,%d", static_cast<long long>(d.event.t),
                  d.event.x, d.event.y, d.event.polarity ? 1 : 0, d.score, d.is_corner ? 1 : 0);
    return buf;
}

inline void write_detections_csv(const std::string& path, std::span<const Detection> detections) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open output file: " + path);
    out << detections_csv_header() << '\n';
    for (const Detection& d : detections) out << format_detection_row(d) << '\n';
    if (!out) throw data_error("I/O error while writing " + path);
}

}  // namespace evtos
