#pragma once

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "evtos/core.hpp"

// Threshold-ordinal surface. Each event decrements its PxP neighborhood,
// zeroes anything that falls below the threshold, and stamps its own pixel
// to 255. Because fault-free values only ever live in {0} u [TH, 255] and
// TH >= 225 in practice, a stored word needs just the low 5 bits of the
// value; the quantized mode models exactly that storage scheme, the
// reference mode keeps full 8-bit words.

namespace evtos {

enum class TosMode { Quantized, Reference };

struct TosConfig {
    int patch = 7;       // P, odd
    int threshold = 225;  // TH
    TosMode mode = TosMode::Quantized;
    // Readout interpretation of a stored 0 word: by default it decodes to
    // value 0; when set, it decodes to 224 (the alternative reconstruction
    // of the truncated-storage scheme, observable only under fault
    // injection or on untouched pixels).
    bool decode_zero_as_224 = false;

    void validate() const {
        if (patch < 3 || patch % 2 == 0)
            throw config_error("tos.patch must be an odd integer >= 3");
        if (mode == TosMode::Quantized) {
            if (threshold < 225 || threshold > 255)
                throw config_error("tos.threshold must be in [225,255] in quantized mode");
        } else {
            if (threshold < 1 || threshold > 255)
                throw config_error("tos.threshold must be in [1,255]");
        }
    }
};

// 5-bit storage codes. Values live in {0} u [225,255]; the top 3 bits carry
// no information there, so code = value mod 32 and 0 keeps meaning 0.
inline uint8_t encode5(int value) {
    if (value != 0 && (value < 225 || value > 255))
        throw std::domain_error("encode5: value " + std::to_string(value) +
                                " not representable in 5-bit storage");
    return uint8_t(value & 31);
}

inline uint8_t decode5(uint8_t code) {
    return code == 0 ? uint8_t(0) : uint8_t(224 + (code & 31));
}

// Write-back bit-flip model. Per-bit flips by default; per-word mode flips
// one random bit of a word with probability ber instead.
struct FaultModel {
    double ber = 0.0;
    bool per_word = false;
    Rng rng;

    FaultModel(double ber_, uint64_t seed, bool per_word_ = false)
        : ber(ber_), per_word(per_word_), rng(seed) {
        if (ber < 0.0 || ber > 1.0) throw config_error("fault.ber must be in [0,1]");
    }

    uint8_t corrupt(uint8_t code) {
        if (ber <= 0.0) return code;
        if (per_word) {
            if (rng.next_bool(ber)) code ^= uint8_t(1u << rng.next_below(5));
            return code;
        }
        for (int bit = 0; bit < 5; ++bit)
            if (rng.next_bool(ber)) code ^= uint8_t(1u << bit);
        return code;
    }
};

inline uint8_t inject_write_error(uint8_t code, FaultModel& fault) { return fault.corrupt(code); }

// Decoded full-frame copy; always taken between event updates, never
// mid-patch.
struct TosFrame {
    SensorGeometry geom;
    std::vector<uint8_t> values;  // row-major

    uint8_t at(int x, int y) const { return values[size_t(y) * geom.width + x]; }
};

struct UpdateTrace {
    int rows = 0;    // patch rows actually touched after border clipping
    int writes = 0;  // enabled write-backs, center included
    int zeroed = 0;  // cells that crossed the threshold to zero
};

class TosSurface {
  public:
    TosSurface(SensorGeometry geom, TosConfig cfg)
        : geom_(geom), cfg_(cfg), words_(size_t(geom.pixels()), 0) {
        geom.validate();
        cfg.validate();
    }

    // One event-by-event update. The patch is clipped at the sensor borders;
    // cells storing 0 keep their write-back disabled and stay 0. Every
    // enabled write-back (the center's 255 stamp included) goes through the
    // fault model when one is attached.
    UpdateTrace update(const Event& e, FaultModel* fault = nullptr) {
        if (!geom_.contains(e.x, e.y))
            throw data_error("tos_update: event (" + std::to_string(e.x) + "," +
                             std::to_string(e.y) + ") outside sensor");
        if (fault && cfg_.mode != TosMode::Quantized)
            throw config_error("fault injection requires the quantized (5-bit) surface");

        const int half = (cfg_.patch - 1) / 2;
        const int x0 = std::max(0, e.x - half);
        const int x1 = std::min(geom_.width - 1, e.x + half);
        const int y0 = std::max(0, e.y - half);
        const int y1 = std::min(geom_.height - 1, e.y + half);

        UpdateTrace trace;
        trace.rows = y1 - y0 + 1;
        const int th = cfg_.threshold;
        for (int y = y0; y <= y1; ++y) {
            uint8_t* row = words_.data() + size_t(y) * geom_.width;
            for (int x = x0; x <= x1; ++x) {
                uint8_t& word = row[x];
                if (word == 0) continue;
                const int value = (cfg_.mode == TosMode::Quantized ? decode5(word) : word) - 1;
                uint8_t out;
                if (value < th) {
                    out = 0;
                    ++trace.zeroed;
                } else {
                    out = cfg_.mode == TosMode::Quantized ? uint8_t(value & 31) : uint8_t(value);
                }
                if (fault) out = fault->corrupt(out);
                word = out;
                ++trace.writes;
            }
        }
        uint8_t center = cfg_.mode == TosMode::Quantized ? encode5(255) : uint8_t(255);
        if (fault) center = fault->corrupt(center);
        words_[size_t(e.y) * geom_.width + e.x] = center;
        ++trace.writes;
        return trace;
    }

    uint8_t value_at(int x, int y) const { return decode_word(words_[size_t(y) * geom_.width + x]); }

    TosFrame snapshot() const {
        TosFrame frame{geom_, std::vector<uint8_t>(words_.size())};
        for (size_t i = 0; i < words_.size(); ++i) frame.values[i] = decode_word(words_[i]);
        return frame;
    }

    const SensorGeometry& geometry() const { return geom_; }
    const TosConfig& config() const { return cfg_; }
    std::span<const uint8_t> words() const { return words_; }

  private:
    uint8_t decode_word(uint8_t word) const {
        if (cfg_.mode == TosMode::Reference) return word;
        if (word == 0 && cfg_.decode_zero_as_224) return 224;
        return decode5(word);
    }

    SensorGeometry geom_;
    TosConfig cfg_;
    std::vector<uint8_t> words_;
};

// Binary PGM (P5, maxval 255) of a decoded frame.
inline void write_pgm(const std::string& path, const TosFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << "P5\n" << frame.geom.width << " " << frame.geom.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.values.data()),
              std::streamsize(frame.values.size()));
    if (!out) throw data_error("I/O error while writing " + path);
}

}  // namespace evtos
