#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtos/core.hpp"

// Event stream ingestion and synthesis. The on-disk format is one event per
// line, "t x y p", with t in decimal seconds, x/y integer pixel coordinates
// and p in {0,1}. Timestamps are converted to integer microseconds on import
// (decimal seconds are floored, exactly, without going through a float).

namespace evtos {

namespace detail {

// Parses a non-negative decimal-seconds token into floored microseconds.
// Done on the digit string so "0.003811000" is 3811 us, never 3810.
inline bool parse_seconds_us(std::string_view tok, int64_t& out_us) {
    size_t i = 0;
    if (i >= tok.size()) return false;
    int64_t secs = 0;
    bool any = false;
    for (; i < tok.size() && tok[i] >= '0' && tok[i] <= '9'; ++i) {
        if (secs > (INT64_MAX - 9) / 10) return false;
        secs = secs * 10 + (tok[i] - '0');
        any = true;
    }
    int64_t micros = 0;
    int frac_digits = 0;
    if (i < tok.size() && tok[i] == '.') {
        ++i;
        for (; i < tok.size() && tok[i] >= '0' && tok[i] <= '9'; ++i) {
            if (frac_digits < 6) micros = micros * 10 + (tok[i] - '0');
            ++frac_digits;
            any = true;
        }
    }
    if (!any || i != tok.size()) return false;
    while (frac_digits < 6) {
        micros *= 10;
        ++frac_digits;
    }
    if (secs > (INT64_MAX - micros) / 1000000) return false;
    out_us = secs * 1000000 + micros;
    return true;
}

inline bool parse_int_field(std::string_view tok, int& out) {
    if (tok.empty() || tok.size() > 9) return false;
    int v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

}  // namespace detail

inline Event parse_event_line(std::string_view line, const SensorGeometry& geom) {
    const auto fields = detail::split_fields(line);
    if (fields.size() != 4)
        throw data_error("expected 4 fields \"t x y p\", got " + std::to_string(fields.size()));
    Event e;
    if (!detail::parse_seconds_us(fields[0], e.t))
        throw data_error("bad timestamp field \"" + std::string(fields[0]) + "\"");
    if (!detail::parse_int_field(fields[1], e.x))
        throw data_error("bad x field \"" + std::string(fields[1]) + "\"");
    if (!detail::parse_int_field(fields[2], e.y))
        throw data_error("bad y field \"" + std::string(fields[2]) + "\"");
    if (fields[3] == "0")
        e.polarity = false;
    else if (fields[3] == "1")
        e.polarity = true;
    else
        throw data_error("bad polarity field \"" + std::string(fields[3]) + "\" (must be 0 or 1)");
    if (!geom.contains(e.x, e.y))
        throw data_error("coordinate (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                         ") outside sensor " + std::to_string(geom.width) + "x" +
                         std::to_string(geom.height));
    return e;
}

inline std::string format_event_line(const Event& e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%lld.%06lld %d %d %d",
                  static_cast<long long>(e.t / 1000000),
                  static_cast<long long>(e.t % 1000000), e.x, e.y, e.polarity ? 1 : 0);
    return buf;
}

// Forward-only reader over an event file. Verifies timestamp monotonicity
// and reports the offending line / event index on failure. Blank lines are
// skipped.
class EventReader {
  public:
    EventReader(const std::string& path, SensorGeometry geom)
        : in_(path), geom_(geom), path_(path) {
        geom_.validate();
        if (!in_) throw data_error("cannot open event file: " + path);
    }

    std::optional<Event> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (detail::split_fields(line).empty()) continue;
            Event e;
            try {
                e = parse_event_line(line, geom_);
            } catch (const data_error& err) {
                throw data_error(path_ + ":" + std::to_string(line_no_) + ": " + err.what());
            }
            if (index_ > 0 && e.t < last_t_)
                throw data_error(path_ + ":" + std::to_string(line_no_) +
                                 ": non-monotone timestamp at event index " +
                                 std::to_string(index_));
            last_t_ = e.t;
            ++index_;
            return e;
        }
        if (in_.bad()) throw data_error("I/O error while reading " + path_);
        return std::nullopt;
    }

    size_t events_read() const { return index_; }

  private:
    std::ifstream in_;
    SensorGeometry geom_;
    std::string path_;
    size_t line_no_ = 0;
    size_t index_ = 0;
    int64_t last_t_ = 0;
};

inline std::vector<Event> load_events(const std::string& path, SensorGeometry geom) {
    EventReader reader(path, geom);
    std::vector<Event> events;
    while (auto e = reader.next()) events.push_back(*e);
    return events;
}

inline void write_events(const std::string& path, std::span<const Event> events) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open output file: " + path);
    for (const Event& e : events) out << format_event_line(e) << '\n';
    if (!out) throw data_error("I/O error while writing " + path);
}

// One piece of a piecewise-constant-rate profile.
struct RateSegment {
    int64_t duration_us = 0;
    double rate_eps = 0.0;  // events per second
};

// Deterministic synthetic stream: per segment, floor(duration * rate / 1e6)
// events with evenly spaced timestamps and uniformly random pixel positions
// and polarities. Even spacing keeps window counts exact, which the rate
// estimator tests rely on.
inline std::vector<Event> synth_stream(std::span<const RateSegment> profile,
                                       SensorGeometry geom, uint64_t seed) {
    geom.validate();
    for (const auto& seg : profile) {
        if (seg.duration_us < 0) throw config_error("synth_stream: negative segment duration");
        if (seg.rate_eps < 0) throw config_error("synth_stream: negative segment rate");
    }
    Rng rng(seed);
    std::vector<Event> events;
    int64_t start = 0;
    for (const auto& seg : profile) {
        const int64_t n =
            int64_t(std::floor(double(seg.duration_us) * seg.rate_eps / 1e6 + 1e-9));
        events.reserve(events.size() + size_t(std::max<int64_t>(n, 0)));
        for (int64_t i = 0; i < n; ++i) {
            Event e;
            e.t = start + (i * seg.duration_us) / n;
            e.x = int(rng.next_below(uint64_t(geom.width)));
            e.y = int(rng.next_below(uint64_t(geom.height)));
            e.polarity = rng.next_bool(0.5);
            events.push_back(e);
        }
        start += seg.duration_us;
    }
    return events;
}

// "dur_us:rate_eps,dur_us:rate_eps,..." -> profile. Used by the CLI.
inline std::vector<RateSegment> parse_rate_profile(std::string_view text) {
    std::vector<RateSegment> profile;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view item = text.substr(pos, comma - pos);
        size_t colon = item.find(':');
        if (colon == std::string_view::npos)
            throw config_error("rate profile: expected dur_us:rate_eps, got \"" +
                               std::string(item) + "\"");
        RateSegment seg;
        try {
            seg.duration_us = std::stoll(std::string(item.substr(0, colon)));
            seg.rate_eps = std::stod(std::string(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw config_error("rate profile: bad number in \"" + std::string(item) + "\"");
        }
        if (seg.duration_us < 0 || seg.rate_eps < 0)
            throw config_error("rate profile: durations and rates must be >= 0");
        profile.push_back(seg);
        pos = comma + 1;
    }
    if (profile.empty()) throw config_error("rate profile: empty");
    return profile;
}

}  // namespace evtos
