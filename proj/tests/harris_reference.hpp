#pragma once

#include <vector>

#include "evtos/harris.hpp"
#include "evtos/tos.hpp"

// Dense Harris reference with explicit nested loops: full 2-D kernel
// convolutions for the gradients and a direct window sum for the structure
// tensor. Deliberately independent of the separable implementation it
// checks.

namespace evtos_test {

inline evtos::HarrisLut harris_reference(const evtos::TosFrame& frame,
                                         const evtos::HarrisConfig& cfg) {
    const int w = frame.geom.width;
    const int h = frame.geom.height;
    const int sh = cfg.sobel_aperture / 2;
    const int wh = cfg.window_aperture / 2;
    const int margin = sh + wh;

    std::vector<double> img(size_t(w) * h);
    for (size_t i = 0; i < img.size(); ++i) img[i] = frame.values[i] / 255.0;

    const auto smooth = evtos::sobel_smooth_kernel(cfg.sobel_aperture);
    const auto deriv = evtos::sobel_deriv_kernel(cfg.sobel_aperture);

    std::vector<double> gx(img.size(), 0.0), gy(img.size(), 0.0);
    for (int y = sh; y < h - sh; ++y) {
        for (int x = sh; x < w - sh; ++x) {
            double ax = 0.0, ay = 0.0;
            for (int j = -sh; j <= sh; ++j) {
                for (int i = -sh; i <= sh; ++i) {
                    const double v = img[size_t(y + j) * w + (x + i)];
                    ax += deriv[size_t(i + sh)] * smooth[size_t(j + sh)] * v;
                    ay += smooth[size_t(i + sh)] * deriv[size_t(j + sh)] * v;
                }
            }
            gx[size_t(y) * w + x] = ax;
            gy[size_t(y) * w + x] = ay;
        }
    }

    evtos::HarrisLut lut{frame.geom, std::vector<double>(img.size(), 0.0), 0};
    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (int j = -wh; j <= wh; ++j) {
                for (int i = -wh; i <= wh; ++i) {
                    const size_t p = size_t(y + j) * w + (x + i);
                    sxx += gx[p] * gx[p];
                    sxy += gx[p] * gy[p];
                    syy += gy[p] * gy[p];
                }
            }
            const double tr = sxx + syy;
            lut.scores[size_t(y) * w + x] = sxx * syy - sxy * sxy - cfg.k * tr * tr;
        }
    }
    return lut;
}

}  // namespace evtos_test
