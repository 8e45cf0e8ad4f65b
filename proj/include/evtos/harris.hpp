#pragma once

#include <cmath>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "evtos/core.hpp"
#include "evtos/tos.hpp"

// Frame-by-frame Harris response over a TOS snapshot. The response map is
// used as a per-event lookup table: events are classified against the last
// computed map, never by running Harris per event.

namespace evtos {

struct HarrisConfig {
    int sobel_aperture = 5;
    int window_aperture = 5;  // box window of the structure tensor
    double k = 0.04;
    double score_threshold = 0.0;

    void validate() const {
        if (sobel_aperture < 3 || sobel_aperture % 2 == 0)
            throw config_error("harris.sobel_aperture must be odd and >= 3");
        if (window_aperture < 3 || window_aperture % 2 == 0)
            throw config_error("harris.window_aperture must be odd and >= 3");
        if (!(k > 0.0 && k < 0.25)) throw config_error("harris.k must be in (0, 0.25)");
    }

    // Scores within this margin of the border are fixed at 0: the Sobel
    // kernel and the box window must both fit.
    int border_margin() const { return sobel_aperture / 2 + window_aperture / 2; }
};

struct HarrisLut {
    SensorGeometry geom;
    std::vector<double> scores;  // row-major
    int64_t frame_index = -1;    // which TOS snapshot produced it; -1 = none yet

    double at(int x, int y) const { return scores[size_t(y) * geom.width + x]; }
};

// Binomial smoothing row of a Sobel kernel (Pascal row of length n).
inline std::vector<double> sobel_smooth_kernel(int n) {
    std::vector<double> row(size_t(n), 1.0);
    for (int i = 1; i < n; ++i) row[size_t(i)] = row[size_t(i - 1)] * double(n - i) / double(i);
    return row;
}

// Derivative row: [-1, 0, 1] convolved with the binomial row of length n-2.
inline std::vector<double> sobel_deriv_kernel(int n) {
    std::vector<double> base{-1.0, 0.0, 1.0};
    for (int len = 3; len < n; ++len) {
        std::vector<double> next(size_t(len) + 1, 0.0);
        for (size_t i = 0; i < base.size(); ++i) {
            next[i] += base[i];
            next[i + 1] += base[i];
        }
        base = std::move(next);
    }
    return base;
}

namespace detail {

// Separable pass: horizontal kernel kx then vertical kernel ky. Border
// outputs where the kernel does not fit are left 0; the caller masks them
// out via the score margin.
inline std::vector<double> separable_filter(const std::vector<double>& img, int w, int h,
                                            const std::vector<double>& kx,
                                            const std::vector<double>& ky) {
    const int hx = int(kx.size()) / 2;
    const int hy = int(ky.size()) / 2;
    std::vector<double> tmp(img.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        const double* src = img.data() + size_t(y) * w;
        double* dst = tmp.data() + size_t(y) * w;
        for (int x = hx; x < w - hx; ++x) {
            double acc = 0.0;
            for (int i = -hx; i <= hx; ++i) acc += kx[size_t(i + hx)] * src[x + i];
            dst[x] = acc;
        }
    }
    std::vector<double> out(img.size(), 0.0);
    for (int y = hy; y < h - hy; ++y) {
        double* dst = out.data() + size_t(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = -hy; j <= hy; ++j) acc += ky[size_t(j + hy)] * tmp[size_t(y + j) * w + x];
            dst[x] = acc;
        }
    }
    return out;
}

}  // namespace detail

// R = det(M) - k * trace(M)^2, with M the Sobel structure tensor box-summed
// over the window aperture. Frame values are normalized to [0,1] before the
// gradients so k keeps its conventional scale.
inline HarrisLut harris_lut(const TosFrame& frame, const HarrisConfig& cfg,
                            int64_t frame_index = 0) {
    cfg.validate();
    const int w = frame.geom.width;
    const int h = frame.geom.height;
    HarrisLut lut{frame.geom, std::vector<double>(size_t(w) * h, 0.0), frame_index};

    const int margin = cfg.border_margin();
    if (w <= 2 * margin || h <= 2 * margin) return lut;  // no interior pixels

    std::vector<double> norm(size_t(w) * h);
    for (size_t i = 0; i < norm.size(); ++i) norm[i] = frame.values[i] / 255.0;

    const auto smooth = sobel_smooth_kernel(cfg.sobel_aperture);
    const auto deriv = sobel_deriv_kernel(cfg.sobel_aperture);
    const auto gx = detail::separable_filter(norm, w, h, deriv, smooth);
    const auto gy = detail::separable_filter(norm, w, h, smooth, deriv);

    std::vector<double> ixx(norm.size()), ixy(norm.size()), iyy(norm.size());
    for (size_t i = 0; i < norm.size(); ++i) {
        ixx[i] = gx[i] * gx[i];
        ixy[i] = gx[i] * gy[i];
        iyy[i] = gy[i] * gy[i];
    }

    const std::vector<double> box(size_t(cfg.window_aperture), 1.0);
    const auto sxx = detail::separable_filter(ixx, w, h, box, box);
    const auto sxy = detail::separable_filter(ixy, w, h, box, box);
    const auto syy = detail::separable_filter(iyy, w, h, box, box);

    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            const size_t i = size_t(y) * w + x;
            const double tr = sxx[i] + syy[i];
            lut.scores[i] = sxx[i] * syy[i] - sxy[i] * sxy[i] - cfg.k * tr * tr;
        }
    }
    return lut;
}

struct Classification {
    bool is_corner = false;
    double score = 0.0;
};

// Pure lookup against the last available response map.
inline Classification classify_event(const Event& e, const HarrisLut& lut,
                                     const HarrisConfig& cfg) {
    Classification c;
    c.score = lut.at(e.x, e.y);
    c.is_corner = c.score > cfg.score_threshold;
    return c;
}

// Score-map dump: one JSON header line, then width*height little-endian
// float32 values, row-major.
inline void write_score_map(const std::string& path, const HarrisLut& lut) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << "{\"width\":" << lut.geom.width << ",\"height\":" << lut.geom.height
        << ",\"frame_index\":" << lut.frame_index << ",\"dtype\":\"float32\"}\n";
    std::vector<float> row(lut.scores.size());
    for (size_t i = 0; i < row.size(); ++i) row[i] = float(lut.scores[i]);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
    if (!out) throw data_error("I/O error while writing " + path);
}

inline HarrisLut read_score_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open score map: " + path);
    std::string header;
    if (!std::getline(in, header)) throw data_error("score map missing header: " + path);
    HarrisLut lut;
    // Minimal field scan; the header is machine-written.
    auto field = [&](const char* key) -> long long {
        const std::string tag = std::string("\"") + key + "\":";
        const size_t pos = header.find(tag);
        if (pos == std::string::npos) throw data_error("score map header missing " + tag);
        return std::stoll(header.substr(pos + tag.size()));
    };
    lut.geom.width = int(field("width"));
    lut.geom.height = int(field("height"));
    lut.frame_index = field("frame_index");
    lut.geom.validate();
    std::vector<float> raw(size_t(lut.geom.pixels()));
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size() * sizeof(float)));
    if (!in) throw data_error("score map truncated: " + path);
    lut.scores.assign(raw.begin(), raw.end());
    return lut;
}

}  // namespace evtos
