#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evtos/core.hpp"

// Behavioral model of the near-memory TOS update engine: per-row four-phase
// patch timing (precharge, minus-one, compare, write-back), per-event energy
// at each supply operating point, event-rate driven operating-point
// selection, and an energy/drop ledger. Everything here is a timing/energy
// abstraction; no functional state lives in this module.

namespace evtos {

// Per-row phase delays in nanoseconds: t1 precharge (PCH), t2 read and
// decrement (MO), t3 compare (CMP), t4 write-back (WR).
struct PipelinePhases {
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;

    void validate() const {
        if (!(t1 > 0 && t2 > 0 && t3 > 0 && t4 > 0))
            throw config_error("pipeline phases must all be > 0");
    }
};

// Measured phase shares of one row period (PCH, MO, CMP, WR). Taken at the
// lowest supply and assumed voltage-independent, so one share vector scales
// to every operating point.
inline constexpr std::array<double, 4> kDefaultPhaseFractions{0.139, 0.306, 0.278, 0.278};

// With read/write-decoupled storage, row k+1 can precharge and read while
// row k is still comparing and writing back, so only t1+t2 serializes per
// row and t3+t4 is paid once at the tail. Without it every row pays all
// four phases.
inline double patch_latency_ns(int patch, const PipelinePhases& ph, bool pipelined) {
    if (patch < 1) throw config_error("patch size must be >= 1");
    ph.validate();
    if (pipelined) return patch * (ph.t1 + ph.t2) + ph.t3 + ph.t4;
    return patch * (ph.t1 + ph.t2 + ph.t3 + ph.t4);
}

// Solves the per-row phase delays so that the pipelined update of a
// patch-row block lands on the given total latency, distributing the row
// period according to the phase fractions.
inline PipelinePhases phases_for_latency(double pipelined_total_ns, int patch,
                                         std::array<double, 4> fractions = kDefaultPhaseFractions) {
    if (pipelined_total_ns <= 0) throw config_error("target latency must be > 0");
    if (patch < 1) throw config_error("patch size must be >= 1");
    double sum = 0;
    for (double f : fractions) {
        if (f <= 0) throw config_error("phase fractions must be > 0");
        sum += f;
    }
    const double w1 = fractions[0] / sum, w2 = fractions[1] / sum;
    const double w3 = fractions[2] / sum, w4 = fractions[3] / sum;
    const double period = pipelined_total_ns / (patch * (w1 + w2) + w3 + w4);
    return PipelinePhases{w1 * period, w2 * period, w3 * period, w4 * period};
}

struct OperatingPoint {
    double vdd = 0.0;             // volts
    double latency_ns = 0.0;      // per-event patch update latency
    double energy_pj = 0.0;       // per-event energy
    double throughput_meps = 0.0; // max sustainable event rate
    double ber = 0.0;             // write-back bit error rate at this supply

    void validate() const {
        if (vdd <= 0 || latency_ns <= 0 || energy_pj <= 0 || throughput_meps <= 0)
            throw config_error("operating point fields must be > 0");
        const double implied = 1000.0 / latency_ns;
        if (std::abs(throughput_meps - implied) > 0.01 * implied)
            throw config_error("operating point at " + std::to_string(vdd) +
                               " V: throughput inconsistent with latency");
        if (ber < 0 || ber > 1) throw config_error("operating point ber must be in [0,1]");
        if (vdd >= 0.62 && ber != 0)
            throw config_error("operating point at " + std::to_string(vdd) +
                               " V: nonzero ber only occurs below 0.62 V");
    }
};

inline void validate_op_table(std::span<const OperatingPoint> table) {
    if (table.empty()) throw config_error("operating point table is empty");
    for (const auto& op : table) op.validate();
    for (size_t i = 1; i < table.size(); ++i)
        if (table[i].vdd <= table[i - 1].vdd)
            throw config_error("operating point table must be sorted by strictly increasing vdd");
}

// Default supply table. The 1.2 V and 0.6 V rows are measured anchor
// points; 0.61 V carries the measured error rate just below the error-free
// supply floor. The intermediate 0.7-1.1 V rows are interpolated (latency
// log-linear in vdd, energy quadratic in vdd through the anchors) and can
// be replaced wholesale via a table file.
inline std::vector<OperatingPoint> default_op_table() {
    constexpr double v_hi = 1.2, lat_hi = 16.0, energy_hi = 139.0;
    constexpr double v_lo = 0.6, lat_lo = 203.0, energy_lo = 26.0;
    const double c = (energy_hi - energy_lo) / (v_hi * v_hi - v_lo * v_lo);
    const double d = energy_lo - c * v_lo * v_lo;
    auto latency = [&](double v) {
        return lat_hi * std::exp(std::log(lat_lo / lat_hi) * (v_hi - v) / (v_hi - v_lo));
    };
    auto energy = [&](double v) { return c * v * v + d; };
    auto make = [&](double v, double ber) {
        const double lat = latency(v);
        return OperatingPoint{v, lat, energy(v), 1000.0 / lat, ber};
    };
    std::vector<OperatingPoint> table;
    table.push_back(OperatingPoint{0.60, lat_lo, energy_lo, 4.9, 0.025});
    table.push_back(make(0.61, 0.002));
    for (double v : {0.7, 0.8, 0.9, 1.0, 1.1}) table.push_back(make(v, 0.0));
    table.push_back(OperatingPoint{1.20, lat_hi, energy_hi, 63.1, 0.0});
    validate_op_table(table);
    return table;
}

struct RateEstimate {
    int64_t t_us = 0;   // window boundary that produced the estimate
    double meps = 0.0;  // events per microsecond == Meps
};

// Moving-window event-rate estimator: three saturating counters in
// round-robin, each counting one half-window. At every half-window boundary
// the pointer advances circularly, the counter it lands on is cleared and
// starts counting, and the other two (the last two complete half-windows)
// are summed into a rate estimate over the full window.
class DvfsEstimator {
  public:
    static constexpr uint32_t kCounterMax = (1u << 20) - 1;

    explicit DvfsEstimator(int64_t window_us = 10000, int64_t origin_us = 0)
        : window_us_(window_us), origin_us_(origin_us) {
        if (window_us < 2) throw config_error("dvfs window_us must be >= 2");
        half_us_ = window_us / 2;
        next_boundary_us_ = origin_us + half_us_;
    }

    // Feeds one event timestamp (monotone). Returns the estimate emitted at
    // the most recent half-window boundary this event stepped across, if
    // any.
    std::optional<RateEstimate> on_event(int64_t t_us) {
        std::optional<RateEstimate> emitted;
        while (t_us >= next_boundary_us_) {
            ptr_ = (ptr_ + 1) % 3;
            counters_[ptr_] = 0;
            const double sum =
                double(counters_[(ptr_ + 1) % 3]) + double(counters_[(ptr_ + 2) % 3]);
            emitted = RateEstimate{next_boundary_us_, sum / double(window_us_)};
            next_boundary_us_ += half_us_;
        }
        if (counters_[ptr_] < kCounterMax) ++counters_[ptr_];
        return emitted;
    }

    int pointer() const { return ptr_; }
    int64_t window_us() const { return window_us_; }

  private:
    int64_t window_us_;
    int64_t origin_us_;
    int64_t half_us_;
    int64_t next_boundary_us_;
    uint32_t counters_[3] = {0, 0, 0};
    int ptr_ = 0;
};

struct SelectedPoint {
    size_t index = 0;
    bool overload = false;  // no point could cover the estimated rate
};

// Lowest-supply point whose capacity covers the estimated rate (times an
// optional headroom factor); the top point with an overload flag when none
// does. The table must be sorted by vdd.
inline SelectedPoint select_op_point(double f_e_meps, std::span<const OperatingPoint> table,
                                     double headroom = 1.0) {
    if (table.empty()) throw config_error("operating point table is empty");
    if (headroom <= 0) throw config_error("headroom must be > 0");
    const double needed = f_e_meps * headroom;
    for (size_t i = 0; i < table.size(); ++i)
        if (table[i].throughput_meps >= needed) return SelectedPoint{i, false};
    return SelectedPoint{table.size() - 1, true};
}

// Energy and busy-time accounting over the accepted event stream. Drops
// follow a fluid model: an event is lost (and consumes no energy) when the
// accumulated processing time has already outrun the elapsed wall time,
// i.e. the instantaneous rate exceeds the point's capacity.
class EnergyLedger {
  public:
    explicit EnergyLedger(size_t table_size) : per_point_(table_size, 0) {}

    void account(const OperatingPoint& op, size_t op_index, int64_t t_us) {
        if (first_) {
            start_us_ = t_us;
            first_ = false;
        }
        end_us_ = t_us;
        // Timestamps are whole microseconds, so events sharing a tick are
        // treated as spread across it: wall credit runs to the end of the
        // event's own microsecond.
        const double wall_ns = double(t_us - start_us_ + 1) * 1000.0;
        if (busy_ns_ > wall_ns) {
            ++dropped_;
            return;
        }
        busy_ns_ += op.latency_ns;
        energy_pj_ += op.energy_pj;
        ++processed_;
        ++per_point_[op_index];
    }

    double energy_pj() const { return energy_pj_; }
    double busy_ns() const { return busy_ns_; }
    int64_t processed() const { return processed_; }
    int64_t dropped() const { return dropped_; }
    int64_t wall_us() const { return first_ ? 0 : end_us_ - start_us_; }
    const std::vector<int64_t>& per_point() const { return per_point_; }

    // pJ per us is uW; reported in mW.
    double average_power_mw() const {
        const int64_t wall = wall_us();
        return wall > 0 ? energy_pj_ / double(wall) / 1000.0 : 0.0;
    }

  private:
    std::vector<int64_t> per_point_;
    double energy_pj_ = 0.0;
    double busy_ns_ = 0.0;
    int64_t processed_ = 0;
    int64_t dropped_ = 0;
    int64_t start_us_ = 0;
    int64_t end_us_ = 0;
    bool first_ = true;
};

// Conventional synchronous digital implementation used as the comparison
// baseline: one pixel per 4 cycles at 500 MHz, i.e. 8 ns per pixel of the
// PxP patch, calibrated to 392 ns / 167 pJ at P=7 and scaled by patch area
// elsewhere.
struct Baseline {
    double latency_ns = 0.0;
    double energy_pj = 0.0;
    double throughput_meps = 0.0;
};

inline Baseline conventional_baseline(int patch) {
    if (patch < 1) throw config_error("patch size must be >= 1");
    const double area = double(patch) * double(patch);
    const double latency = 8.0 * area;
    return Baseline{latency, 167.0 * area / 49.0, 1000.0 / latency};
}

// Storage blocks of 180x600 cells (5-bit words for a 180x120 pixel tile)
// needed to cover a sensor.
inline int sram_block_count(const SensorGeometry& geom) {
    const int64_t bits = geom.pixels() * 5;
    const int64_t block_bits = 180 * 600;
    return int((bits + block_bits - 1) / block_bits);
}

// Measured power split of the update engine at 1.2 V, kept as reported
// constants for the report output (peripheral compute/write-back circuits,
// storage array, drivers, sense amplifiers).
inline constexpr std::array<std::pair<const char*, double>, 4> kPowerBreakdown{{
    {"peripheral", 0.459},
    {"array", 0.319},
    {"driver", 0.116},
    {"sense_amp", 0.106},
}};

struct DvfsTraceRow {
    int64_t t_us = 0;
    double f_e_meps = 0.0;
    double vdd = 0.0;
    double capacity_meps = 0.0;
    bool overload = false;
};

struct HwConfig {
    std::vector<OperatingPoint> table = default_op_table();
    int64_t dvfs_window_us = 10000;
    double headroom = 1.0;
    bool dvfs = true;   // false pins the top operating point
    int64_t origin_us = 0;
    bool collect_trace = false;

    void validate() const {
        validate_op_table(table);
        if (dvfs_window_us < 2) throw config_error("hw.dvfs_window_us must be >= 2");
        if (headroom <= 0) throw config_error("hw.headroom must be > 0");
    }
};

// Drives the estimator, point selection and ledger over a stream of
// accepted-event timestamps.
class HardwareSim {
  public:
    explicit HardwareSim(HwConfig cfg)
        : cfg_(std::move(cfg)),
          estimator_(cfg_.dvfs_window_us, cfg_.origin_us),
          ledger_(cfg_.table.size()) {
        cfg_.validate();
        current_ = cfg_.dvfs ? select_op_point(0.0, cfg_.table, cfg_.headroom).index
                             : cfg_.table.size() - 1;
        max_selected_ = current_;
    }

    void on_event(int64_t t_us) {
        if (const auto est = estimator_.on_event(t_us)) {
            last_estimate_ = *est;
            if (cfg_.dvfs) {
                const SelectedPoint sel = select_op_point(est->meps, cfg_.table, cfg_.headroom);
                current_ = sel.index;
                overload_ = sel.overload;
                max_selected_ = std::max(max_selected_, current_);
            }
            if (cfg_.collect_trace)
                trace_.push_back(DvfsTraceRow{est->t_us, est->meps, cfg_.table[current_].vdd,
                                              cfg_.table[current_].throughput_meps, overload_});
        }
        ledger_.account(cfg_.table[current_], current_, t_us);
    }

    const EnergyLedger& ledger() const { return ledger_; }
    const std::vector<DvfsTraceRow>& trace() const { return trace_; }
    const OperatingPoint& current_point() const { return cfg_.table[current_]; }
    const OperatingPoint& max_selected_point() const { return cfg_.table[max_selected_]; }
    const std::vector<OperatingPoint>& table() const { return cfg_.table; }
    std::optional<RateEstimate> last_estimate() const { return last_estimate_; }
    bool overloaded() const { return overload_; }

  private:
    HwConfig cfg_;
    DvfsEstimator estimator_;
    EnergyLedger ledger_;
    size_t current_ = 0;
    size_t max_selected_ = 0;
    bool overload_ = false;
    std::optional<RateEstimate> last_estimate_;
    std::vector<DvfsTraceRow> trace_;
};

}  // namespace evtos
