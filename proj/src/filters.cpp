#include "wife/filters.hpp"

#include <cmath>

namespace wife {

namespace {

using Idx = long long;

// One axis of a reflect-padded correlation; `rows` selects the vertical pass.
GrayImage blur_axis(const GrayImage& x, std::span<const double> taps, bool rows) {
    const std::size_t h = x.height(), w = x.width();
    const Idx r = static_cast<Idx>(taps.size() / 2);
    GrayImage out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (Idx k = -r; k <= r; ++k) {
                const double t = taps[static_cast<std::size_t>(k + r)];
                acc += rows ? t * x(reflect_index(static_cast<Idx>(y) + k, h), c)
                            : t * x(y, reflect_index(static_cast<Idx>(c) + k, w));
            }
            out(y, c) = acc;
        }
    }
    return out;
}

GrayImage blur_axis_adjoint(const GrayImage& g, std::span<const double> taps, bool rows) {
    const std::size_t h = g.height(), w = g.width();
    const Idx r = static_cast<Idx>(taps.size() / 2);
    GrayImage out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t c = 0; c < w; ++c) {
            const double v = g(y, c);
            for (Idx k = -r; k <= r; ++k) {
                const double t = taps[static_cast<std::size_t>(k + r)];
                if (rows) {
                    out(reflect_index(static_cast<Idx>(y) + k, h), c) += t * v;
                } else {
                    out(y, reflect_index(static_cast<Idx>(c) + k, w)) += t * v;
                }
            }
        }
    }
    return out;
}

}  // namespace

GrayImage correlate3x3(const GrayImage& x, const Kernel3& k) {
    const std::size_t h = x.height(), w = x.width();
    GrayImage out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t c = 0; c < w; ++c) {
            // Taken relative to the centre so flat regions give exactly 0
            // under zero-sum kernels.
            const double centre = x(y, c);
            double acc = 0.0, taps = 0.0;
            for (Idx dy = -1; dy <= 1; ++dy) {
                const std::size_t sy = reflect_index(static_cast<Idx>(y) + dy, h);
                for (Idx dx = -1; dx <= 1; ++dx) {
                    const double t = k[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)];
                    if (t == 0.0) continue;
                    acc += t * (x(sy, reflect_index(static_cast<Idx>(c) + dx, w)) - centre);
                    taps += t;
                }
            }
            out(y, c) = taps == 0.0 ? acc : acc + taps * centre;
        }
    }
    return out;
}

GrayImage correlate3x3_adjoint(const GrayImage& g, const Kernel3& k) {
    const std::size_t h = g.height(), w = g.width();
    GrayImage out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t c = 0; c < w; ++c) {
            const double v = g(y, c);
            if (v == 0.0) continue;
            for (Idx dy = -1; dy <= 1; ++dy) {
                const std::size_t sy = reflect_index(static_cast<Idx>(y) + dy, h);
                for (Idx dx = -1; dx <= 1; ++dx) {
                    const double t = k[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)];
                    if (t != 0.0) out(sy, reflect_index(static_cast<Idx>(c) + dx, w)) += t * v;
                }
            }
        }
    }
    return out;
}

std::vector<double> gaussian_taps(int radius, double sigma) {
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + radius)] = v;
        total += v;
    }
    for (double& v : taps) v /= total;
    return taps;
}

GrayImage separable_blur(const GrayImage& x, std::span<const double> taps) {
    return blur_axis(blur_axis(x, taps, false), taps, true);
}

GrayImage separable_blur_adjoint(const GrayImage& g, std::span<const double> taps) {
    return blur_axis_adjoint(blur_axis_adjoint(g, taps, true), taps, false);
}

}  // namespace wife
