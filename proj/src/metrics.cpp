#include "wife/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "wife/filters.hpp"
#include "wife/losses.hpp"
#include "wife/wavelet.hpp"

namespace wife {

namespace {

void require_triple(const GrayImage& a, const GrayImage& b, const GrayImage& f, const char* op) {
    if (!a.same_size(b) || !a.same_size(f)) {
        throw ShapeError(std::string(op) + ": a, b and f must have the same size");
    }
}

struct EdgeField {
    GrayImage strength, angle;
};

EdgeField edges(const GrayImage& x) {
    const GrayImage gx = correlate3x3(x, kSobelX);
    const GrayImage gy = correlate3x3(x, kSobelY);
    EdgeField e{GrayImage(x.height(), x.width()), GrayImage(x.height(), x.width())};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double sx = gx.pixels()[i], sy = gy.pixels()[i];
        e.strength.pixels()[i] = std::sqrt(sx * sx + sy * sy);
        e.angle.pixels()[i] = sx == 0.0 ? std::numbers::pi / 2 : std::atan(sy / sx);
    }
    return e;
}

double preservation(double g_src, double g_f, double a_src, double a_f, const QabfConstants& k) {
    const double hi = std::max(g_src, g_f);
    const double rel_strength = hi == 0.0 ? 1.0 : std::min(g_src, g_f) / hi;
    const double rel_angle = 1.0 - std::abs(a_src - a_f) / (std::numbers::pi / 2);
    const double qg = std::min(1.0, 1.0 / (1.0 + std::exp(k.kappa_g * (rel_strength - k.sigma_g))) / k.gamma_g);
    const double qa = std::min(1.0, 1.0 / (1.0 + std::exp(k.kappa_a * (rel_angle - k.sigma_a))) / k.gamma_a);
    return qg * qa;
}

struct WindowStats {
    double mean_x, mean_y, var_x, var_y, cov;
};

WindowStats window_stats(const GrayImage& x, const GrayImage& y, std::size_t top, std::size_t left,
                         std::size_t size) {
    const double n = static_cast<double>(size * size);
    double mx = 0.0, my = 0.0;
    for (std::size_t r = top; r < top + size; ++r) {
        for (std::size_t c = left; c < left + size; ++c) {
            mx += x(r, c);
            my += y(r, c);
        }
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t r = top; r < top + size; ++r) {
        for (std::size_t c = left; c < left + size; ++c) {
            const double dx = x(r, c) - mx, dy = y(r, c) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    return {mx, my, vx / n, vy / n, cxy / n};
}

// Universal image quality index; degenerate factors (flat or black windows)
// count as perfect agreement.
double uiqi(const WindowStats& s) {
    const double contrast_den = s.var_x + s.var_y;
    const double lum_den = s.mean_x * s.mean_x + s.mean_y * s.mean_y;
    const double structure = contrast_den == 0.0 ? 1.0 : 2.0 * s.cov / contrast_den;
    const double luminance = lum_den == 0.0 ? 1.0 : 2.0 * s.mean_x * s.mean_y / lum_den;
    return structure * luminance;
}

std::vector<int> histogram_bins(const GrayImage& x) {
    const auto px = x.pixels();
    const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<int> bins(px.size(), 0);
    if (hi == lo) return bins;
    for (std::size_t i = 0; i < px.size(); ++i) {
        bins[i] = std::min(255, static_cast<int>(std::floor((px[i] - lo) / (hi - lo) * 256.0)));
    }
    return bins;
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

GrayImage sobel_magnitude(const GrayImage& x) { return edges(x).strength; }

GrayImage plane_of(const Tensor& t) {
    const Shape& s = t.shape();
    return GrayImage(s.h, s.w, std::vector<double>(t.data().begin(), t.data().end()));
}

std::array<GrayImage, 4> subbands(const GrayImage& x) {
    const SubbandSet s = dwt2(to_tensor(x));
    return {plane_of(s.ll), plane_of(s.lh), plane_of(s.hl), plane_of(s.hh)};
}

}  // namespace

double q_abf(const GrayImage& a, const GrayImage& b, const GrayImage& f, const QabfConstants& k) {
    require_triple(a, b, f, "q_abf");
    if (a.height() < 3 || a.width() < 3) throw ShapeError("q_abf: images must be at least 3x3");
    const EdgeField ea = edges(a), eb = edges(b), ef = edges(f);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ga = ea.strength.pixels()[i], gb = eb.strength.pixels()[i];
        const double gf = ef.strength.pixels()[i], af = ef.angle.pixels()[i];
        num += preservation(ga, gf, ea.angle.pixels()[i], af, k) * ga +
               preservation(gb, gf, eb.angle.pixels()[i], af, k) * gb;
        den += ga + gb;
    }
    // No source edges: nothing to preserve.
    return den == 0.0 ? 1.0 : num / den;
}

double q_w(const GrayImage& a, const GrayImage& b, const GrayImage& f) {
    require_triple(a, b, f, "q_w");
    constexpr std::size_t kWin = 8;
    if (a.height() < kWin || a.width() < kWin) throw ShapeError("q_w: images must be at least 8x8");
    double weighted = 0.0, total_weight = 0.0, plain = 0.0;
    std::size_t windows = 0;
    for (std::size_t top = 0; top + kWin <= a.height(); ++top) {
        for (std::size_t left = 0; left + kWin <= a.width(); ++left) {
            const WindowStats af = window_stats(a, f, top, left, kWin);
            const WindowStats bf = window_stats(b, f, top, left, kWin);
            const double sa = af.var_x, sb = bf.var_x;
            const double lambda = sa + sb == 0.0 ? 0.5 : sa / (sa + sb);
            const double q = lambda * uiqi(af) + (1.0 - lambda) * uiqi(bf);
            const double c = std::max(sa, sb);
            weighted += c * q;
            total_weight += c;
            plain += q;
            ++windows;
        }
    }
    // All windows flat in both sources: fall back to uniform weights.
    return total_weight == 0.0 ? plain / static_cast<double>(windows) : weighted / total_weight;
}

double normalized_mutual_information(const GrayImage& x, const GrayImage& y) {
    if (!x.same_size(y)) throw ShapeError("normalized_mutual_information: sizes differ");
    const auto bx = histogram_bins(x), by = histogram_bins(y);
    std::vector<double> joint(256 * 256, 0.0), px(256, 0.0), py(256, 0.0);
    const double n = static_cast<double>(bx.size());
    for (std::size_t i = 0; i < bx.size(); ++i) {
        joint[static_cast<std::size_t>(bx[i] * 256 + by[i])] += 1.0 / n;
        px[static_cast<std::size_t>(bx[i])] += 1.0 / n;
        py[static_cast<std::size_t>(by[i])] += 1.0 / n;
    }
    const double hx = entropy(px), hy = entropy(py), hxy = entropy(joint);
    if (hx + hy == 0.0) return 1.0;
    return std::clamp(2.0 * (hx + hy - hxy) / (hx + hy), 0.0, 1.0);
}

double fmi(const GrayImage& a, const GrayImage& b, const GrayImage& f) {
    require_triple(a, b, f, "fmi");
    const GrayImage fa = sobel_magnitude(a), fb = sobel_magnitude(b), ff = sobel_magnitude(f);
    return 0.5 * (normalized_mutual_information(ff, fa) + normalized_mutual_information(ff, fb));
}

MetricReport evaluate(const GrayImage& a, const GrayImage& b, const GrayImage& f) {
    MetricReport r;
    r.ssim_a = ssim(f, a);
    r.ssim_b = ssim(f, b);
    r.q_abf = q_abf(a, b, f);
    r.q_w = q_w(a, b, f);
    r.fmi = fmi(a, b, f);
    return r;
}

const char* band_name(Band b) {
    switch (b) {
        case Band::ll: return "LL";
        case Band::lh: return "LH";
        case Band::hl: return "HL";
        case Band::hh: return "HH";
    }
    return "?";
}

std::array<BandRow, 8> band_correlation_study(const GrayImage& a, const GrayImage& b,
                                              const GrayImage& f) {
    require_triple(a, b, f, "band_correlation_study");
    if (a.height() % 2 || a.width() % 2 || a.height() < 22 || a.width() < 22) {
        throw ShapeError("band_correlation_study: sizes must be even and at least 22x22");
    }
    const auto fused = subbands(f);
    std::array<BandRow, 8> rows{};
    std::size_t r = 0;
    for (const auto& [tag, src] : {std::pair{'a', &a}, std::pair{'b', &b}}) {
        const auto bands = subbands(*src);
        for (std::size_t k = 0; k < 4; ++k) {
            double high = 0.0;
            if (k == 0) {
                for (std::size_t j = 1; j < 4; ++j) high += ssim(bands[0], fused[j]);
                high /= 3.0;
            } else {
                high = ssim(bands[k], fused[k]);
            }
            rows[r++] = BandRow{static_cast<Band>(k), tag, ssim(bands[k], fused[0]), high};
        }
    }
    return rows;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string metrics_csv(const MetricReport& r) {
    std::string out = "metric,value\n";
    auto row = [&](const char* name, double v) { out += std::string(name) + "," + format_value(v) + "\n"; };
    row("ssim_a", r.ssim_a);
    row("ssim_b", r.ssim_b);
    row("q_abf", r.q_abf);
    row("q_w", r.q_w);
    row("fmi", r.fmi);
    return out;
}

std::string band_study_csv(const std::array<BandRow, 8>& rows) {
    std::string out = "band,src,ssim_low,ssim_high\n";
    for (const BandRow& r : rows) {
        out += std::string(band_name(r.band)) + "," + r.source + "," + format_value(r.ssim_low) + "," +
               format_value(r.ssim_high) + "\n";
    }
    return out;
}

}  // namespace wife
