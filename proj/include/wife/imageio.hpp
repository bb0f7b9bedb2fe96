#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "wife/tensor.hpp"

namespace wife {

// Single-channel image. Loaders produce pixels in [0, 1]; the loss and metric
// code also uses this type for intermediate planes (e.g. wavelet subbands).
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), pixels_(height * width, fill) {}
    GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return pixels_.size(); }

    double& operator()(std::size_t y, std::size_t x) { return pixels_[y * width_ + x]; }
    double operator()(std::size_t y, std::size_t x) const { return pixels_[y * width_ + x]; }

    std::span<double> pixels() { return pixels_; }
    std::span<const double> pixels() const { return pixels_; }

    bool same_size(const GrayImage& o) const { return height_ == o.height_ && width_ == o.width_; }
    bool in_unit_range() const;
    bool operator==(const GrayImage&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> pixels_;
};

struct RgbImage {
    GrayImage r, g, b;

    std::size_t height() const { return r.height(); }
    std::size_t width() const { return r.width(); }
};

// Full-range BT.601. Y in [0,1]; Cb, Cr in [-0.5, 0.5].
struct YCbCrImage {
    GrayImage y, cb, cr;
};

using AnyImage = std::variant<GrayImage, RgbImage>;

// Binary PGM (P5) / PPM (P6), maxval 255 or 65535. Throws ParseError.
AnyImage load_pnm(const std::filesystem::path& path);
AnyImage decode_pnm(std::span<const std::uint8_t> bytes);

// 8-bit output, round-half-away-from-zero after clamping to [0,1].
void save_pnm(const GrayImage& image, const std::filesystem::path& path);
void save_pnm(const RgbImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pnm(const GrayImage& image);
std::vector<std::uint8_t> encode_pnm(const RgbImage& image);

YCbCrImage rgb_to_ycbcr(const RgbImage& rgb);
// Exact algebraic inverse; clamp=false exposes the unclamped values.
RgbImage ycbcr_to_rgb(const YCbCrImage& ycc, bool clamp = true);

// Luma of an RGB image, or the image itself when already gray.
GrayImage luma(const AnyImage& image);

Tensor to_tensor(const GrayImage& image);
// Expects (1,1,H,W); clamps to [0,1].
GrayImage from_tensor(const Tensor& t);

}  // namespace wife
