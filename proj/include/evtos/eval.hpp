#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <span>
#include <utility>
#include <vector>

#include "evtos/core.hpp"
#include "evtos/pipeline.hpp"
#include "evtos/scene.hpp"

// Precision-recall evaluation of corner classifications and the write-back
// fault-impact experiment (clean pipeline vs error-injected pipeline).

namespace evtos {

struct LabeledDetection {
    double score = 0.0;
    bool label = false;
};

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One point per distinct score, swept descending ("predict positive" means
// score >= threshold). The area is the trapezoidal integral over the
// achieved recall range, with no extrapolation toward recall 0 or 1.
struct PrCurve {
    std::vector<PrPoint> points;
    double auc = 0.0;
};

inline PrCurve pr_curve(std::vector<LabeledDetection> dets) {
    int64_t positives = 0;
    for (const auto& d : dets) positives += d.label ? 1 : 0;
    if (positives == 0 || positives == int64_t(dets.size()))
        throw data_error("pr_curve: need at least one positive and one negative label");

    std::sort(dets.begin(), dets.end(),
              [](const LabeledDetection& a, const LabeledDetection& b) { return a.score > b.score; });

    PrCurve curve;
    int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < dets.size()) {
        const double threshold = dets[i].score;
        for (; i < dets.size() && dets[i].score == threshold; ++i) {
            if (dets[i].label)
                ++tp;
            else
                ++fp;
        }
        PrPoint p;
        p.threshold = threshold;
        p.precision = double(tp) / double(tp + fp);
        p.recall = double(tp) / double(positives);
        curve.points.push_back(p);
    }
    for (size_t j = 1; j < curve.points.size(); ++j) {
        const PrPoint& a = curve.points[j - 1];
        const PrPoint& b = curve.points[j];
        curve.auc += (b.recall - a.recall) * 0.5 * (a.precision + b.precision);
    }
    return curve;
}

// True iff the event lies within tolerance_px of any polygon vertex at the
// event's own timestamp.
inline std::vector<bool> ground_truth_labels(std::span<const Event> events,
                                             const PolygonScene& scene,
                                             double tolerance_px = 3.0) {
    std::vector<bool> labels;
    labels.reserve(events.size());
    const double tol2 = tolerance_px * tolerance_px;
    for (const Event& e : events) {
        bool hit = false;
        for (const Point2& c : scene.corners_at(e.t)) {
            const double dx = e.x - c.x;
            const double dy = e.y - c.y;
            if (dx * dx + dy * dy <= tol2) {
                hit = true;
                break;
            }
        }
        labels.push_back(hit);
    }
    return labels;
}

struct BerRun {
    double ber = 0.0;
    uint64_t fault_seed = 0;
    double auc = 0.0;
    double delta_auc = 0.0;  // clean auc minus this run's auc
    PrCurve curve;
    std::vector<Detection> detections;
    TosFrame final_frame;
};

struct BerReport {
    double clean_auc = 0.0;
    TosFrame clean_frame;
    std::vector<BerRun> runs;
};

// Runs the pipeline once per error rate (a clean baseline run plus one run
// per requested ber, 0 included if listed) and compares the resulting
// precision-recall areas. Labels must align with the accepted-event
// sequence, which is identical across runs because the denoiser never sees
// the injected faults. When no labels are supplied, the clean run's top
// pseudo_quantile scores become pseudo ground truth, so the areas measure
// consistency with the fault-free detector rather than absolute quality.
inline BerReport ber_experiment(std::span<const Event> events, const PipelineConfig& cfg,
                                std::span<const double> bers, uint64_t seed,
                                const std::vector<bool>* labels = nullptr,
                                double pseudo_quantile = 0.99, bool parallel = false) {
    for (double b : bers)
        if (b < 0.0 || b > 1.0) throw config_error("ber values must be in [0,1]");

    auto run_with_frame = [&](FaultModel* fault) {
        Pipeline pipeline(cfg, fault);
        std::vector<Detection> dets;
        dets.reserve(events.size());
        for (const Event& e : events)
            if (auto d = pipeline.process(e)) dets.push_back(*d);
        return std::pair<std::vector<Detection>, TosFrame>{std::move(dets),
                                                           pipeline.surface().snapshot()};
    };

    auto [clean, clean_frame] = run_with_frame(nullptr);
    if (clean.empty()) throw data_error("ber_experiment: no accepted events to evaluate");

    std::vector<bool> label_store;
    if (!labels) {
        std::vector<double> scores(clean.size());
        for (size_t i = 0; i < clean.size(); ++i) scores[i] = clean[i].score;
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        const size_t cut = std::min(sorted.size() - 1,
                                    size_t(double(sorted.size()) * pseudo_quantile));
        const double threshold = sorted[cut];
        label_store.reserve(scores.size());
        for (double s : scores) label_store.push_back(s > threshold);
        labels = &label_store;
    }
    if (labels->size() != clean.size())
        throw data_error("ber_experiment: labels do not align with accepted events");

    auto curve_for = [&](const std::vector<Detection>& dets) {
        std::vector<LabeledDetection> ld(dets.size());
        for (size_t i = 0; i < dets.size(); ++i) ld[i] = {dets[i].score, (*labels)[i]};
        return pr_curve(std::move(ld));
    };

    BerReport report;
    const PrCurve clean_curve = curve_for(clean);
    report.clean_auc = clean_curve.auc;
    report.clean_frame = clean_frame;

    auto run_one = [&](size_t i) {
        BerRun run;
        run.ber = bers[i];
        run.fault_seed = derive_seed(seed, "fault-run-" + std::to_string(i));
        if (run.ber == 0.0) {
            run.detections = clean;
            run.curve = clean_curve;
            run.final_frame = clean_frame;
        } else {
            FaultModel fault(run.ber, run.fault_seed);
            auto [dets, frame] = run_with_frame(&fault);
            run.detections = std::move(dets);
            run.final_frame = std::move(frame);
            run.curve = curve_for(run.detections);
        }
        run.auc = run.curve.auc;
        run.delta_auc = report.clean_auc - run.auc;
        return run;
    };

    report.runs.resize(bers.size());
    if (parallel && bers.size() > 1) {
        std::vector<std::future<BerRun>> futures;
        futures.reserve(bers.size());
        for (size_t i = 0; i < bers.size(); ++i)
            futures.push_back(std::async(std::launch::async, run_one, i));
        for (size_t i = 0; i < bers.size(); ++i) report.runs[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < bers.size(); ++i) report.runs[i] = run_one(i);
    }
    return report;
}

}  // namespace evtos
