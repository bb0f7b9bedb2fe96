#include "wife/synthetic.hpp"

#include <cmath>

#include "wife/random.hpp"

namespace wife {

GrayImage synthetic_image(std::uint64_t seed, std::size_t height, std::size_t width) {
    Rng rng(seed);
    struct Wave {
        double amp, fy, fx, phase;
    };
    Wave waves[4];
    for (Wave& w : waves) {
        w = {rng.uniform(0.05, 0.12), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6),
             rng.uniform(0.0, 6.283185307179586)};
    }
    GrayImage img(height, width);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double v = 0.5;
            for (const Wave& w : waves) {
                v += w.amp * std::cos(w.fy * static_cast<double>(y) + w.fx * static_cast<double>(x) + w.phase);
            }
            img(y, x) = v;
        }
    }
    return img;
}

}  // namespace wife
