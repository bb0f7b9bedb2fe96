#pragma once

#include <cstdint>
#include <optional>

#include "wife/imageio.hpp"

namespace wife {

struct LossWeights {
    double alpha = 2.0;
    double beta = 10.0;
    double gamma = 1.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double gamma1 = 0.5;
    double gamma2 = 0.5;

    void validate() const;
};

// Image gradient used by the texture term: |Gx| + |Gy| per pixel.
enum class GradientOperator { sobel, forward_difference };

// A loss term value and its gradient with respect to the fused image.
struct TermResult {
    double value = 0.0;
    GrayImage grad;
};

struct LossReport {
    double total = 0.0;
    double l_int = 0.0;
    double l_text = 0.0;
    double l_ssim = 0.0;
    std::optional<GrayImage> grad;
};

// (a1/HW)|f-a|_1 + (a2/HW)|f-b|_1, sign(0) = 0.
TermResult loss_intensity(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                          double alpha1 = 1.0, double alpha2 = 1.0);

// (1/HW) | |grad f| - max(|grad a|, |grad b|) |_1 with reflect padding.
TermResult loss_texture(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                        GradientOperator op = GradientOperator::sobel);

// Gradient magnitude |Gx| + |Gy| under the chosen operator.
GrayImage gradient_magnitude(const GrayImage& x, GradientOperator op = GradientOperator::sobel);

inline constexpr int kSsimRadius = 5;  // 11x11 window
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Per-pixel SSIM, 11x11 Gaussian window (sigma 1.5), reflect padding, L = 1.
GrayImage ssim_map(const GrayImage& x, const GrayImage& y);
double ssim(const GrayImage& x, const GrayImage& y);
// d ssim(x, y) / dx.
GrayImage ssim_gradient(const GrayImage& x, const GrayImage& y);

// g1 (1 - SSIM(f,a)) + g2 (1 - SSIM(f,b)).
TermResult loss_ssim(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                     double gamma1 = 0.5, double gamma2 = 0.5);

LossReport loss_total(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                      const LossWeights& w = {}, bool with_grad = true,
                      GradientOperator op = GradientOperator::sobel);

struct GradcheckOptions {
    double step = 1e-6;
    std::size_t samples = 64;
    std::uint64_t seed = 0;
    // Skip pixels within 10 steps of an L1 kink (intensity, texture).
    bool avoid_kinks = true;
    // Denominator floor for the relative error.
    double floor = 1e-6;
    GradientOperator op = GradientOperator::sobel;
};

struct GradcheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    double max_abs_analytic = 0.0;
    double max_abs_numeric = 0.0;
    std::size_t samples = 0;
};

// Central finite differences of loss_total on randomly sampled pixels,
// compared against the analytic gradient.
GradcheckReport gradcheck(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                          const LossWeights& w, const GradcheckOptions& opt = {});

}  // namespace wife
