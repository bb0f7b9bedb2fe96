#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wife/imageio.hpp"
#include "wife/random.hpp"
#include "wife/tensor.hpp"

namespace testing {

// splitmix64 stream shared with tests/oracles/oracle.py.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    double uniform() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

inline wife::GrayImage noise_image(std::uint64_t seed, std::size_t h, std::size_t w) {
    SplitMix g(seed);
    wife::GrayImage img(h, w);
    for (double& v : img.pixels()) v = g.uniform();
    return img;
}

struct Triple {
    wife::GrayImage a, b, f;
};

// Same construction as the oracle: f = 0.6 a + 0.3 b + 0.1 e.
inline Triple oracle_triple(std::uint64_t seed, std::size_t n) {
    Triple t{noise_image(seed * 3, n, n), noise_image(seed * 3 + 1, n, n), wife::GrayImage(n, n)};
    const wife::GrayImage e = noise_image(seed * 3 + 2, n, n);
    for (std::size_t i = 0; i < t.f.size(); ++i) {
        t.f.pixels()[i] = 0.6 * t.a.pixels()[i] + 0.3 * t.b.pixels()[i] + 0.1 * e.pixels()[i];
    }
    return t;
}

inline wife::GrayImage structured(std::size_t n) {
    wife::GrayImage img(n, n);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            img(y, x) = 0.5 + 0.3 * std::sin(0.4 * static_cast<double>(x)) * std::cos(0.3 * static_cast<double>(y));
        }
    }
    return img;
}

inline wife::Tensor random_tensor(std::uint64_t seed, wife::Shape s, double lo = -1.0, double hi = 1.0) {
    wife::Rng rng(seed);
    wife::Tensor t(s);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline wife::Matrix random_matrix(std::uint64_t seed, std::size_t r, std::size_t c, double scale = 1.0) {
    wife::Rng rng(seed);
    wife::Matrix m(r, c);
    for (double& v : m.data()) v = rng.uniform(-scale, scale);
    return m;
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("wife_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace testing
