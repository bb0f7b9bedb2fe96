#pragma once

#include <array>
#include <optional>
#include <string>

#include "wife/imageio.hpp"

namespace wife {

struct MetricReport {
    double ssim_a = 0.0;  // SSIM(f, a)
    double ssim_b = 0.0;  // SSIM(f, b)
    double q_abf = 0.0;
    double q_w = 0.0;
    double fmi = 0.0;
    // Not implemented; kept absent rather than reported as zero.
    std::optional<double> q_cb, vif, q_p;
};

// Edge-preservation constants of the gradient-based fusion metric.
struct QabfConstants {
    double gamma_g = 0.9994, kappa_g = -15.0, sigma_g = 0.5;
    double gamma_a = 0.9879, kappa_a = -22.0, sigma_a = 0.8;
};

// Gradient-based fusion quality. Each preservation factor is the sigmoid
// divided by its Gamma (the sigmoid's value at a perfect match), capped at 1.
double q_abf(const GrayImage& a, const GrayImage& b, const GrayImage& f,
             const QabfConstants& k = {});

// Piella's weighted fusion quality index, 8x8 windows at stride 1, variance
// saliency.
double q_w(const GrayImage& a, const GrayImage& b, const GrayImage& f);

// Normalized mutual information between 256-bin histograms of Sobel
// gradient magnitudes, averaged over (f, a) and (f, b).
double fmi(const GrayImage& a, const GrayImage& b, const GrayImage& f);

// 2 I(X;Y) / (H(X) + H(Y)) of two feature maps; 1 when both entropies vanish.
double normalized_mutual_information(const GrayImage& x, const GrayImage& y);

MetricReport evaluate(const GrayImage& a, const GrayImage& b, const GrayImage& f);

enum class Band { ll, lh, hl, hh };
const char* band_name(Band b);

// One source subband against the fused low band and the fused high group.
struct BandRow {
    Band band;
    char source;  // 'a' or 'b'
    double ssim_low;
    double ssim_high;
};

// 8 rows: bands LL, LH, HL, HH for source a, then for source b.
// ssim_low = SSIM(src band, fused LL). ssim_high pairs a detail band with
// the fused detail band of the same orientation; for LL it is the mean over
// the three fused detail bands.
std::array<BandRow, 8> band_correlation_study(const GrayImage& a, const GrayImage& b,
                                              const GrayImage& f);

// "%.9g" formatting used by every CSV writer.
std::string format_value(double v);
std::string metrics_csv(const MetricReport& r);
std::string band_study_csv(const std::array<BandRow, 8>& rows);

}  // namespace wife
