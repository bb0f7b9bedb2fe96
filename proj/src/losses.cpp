#include "wife/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wife/filters.hpp"
#include "wife/random.hpp"

namespace wife {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_same(const GrayImage& x, const GrayImage& y, const char* op) {
    if (!x.same_size(y)) {
        throw ShapeError(std::string(op) + ": image sizes differ " + std::to_string(x.height()) + "x" +
                         std::to_string(x.width()) + " vs " + std::to_string(y.height()) + "x" +
                         std::to_string(y.width()));
    }
}

std::pair<const Kernel3*, const Kernel3*> kernels(GradientOperator op) {
    if (op == GradientOperator::sobel) return {&kSobelX, &kSobelY};
    return {&kForwardDiffX, &kForwardDiffY};
}

const std::vector<double>& ssim_taps() {
    static const std::vector<double> taps = gaussian_taps(kSsimRadius, kSsimSigma);
    return taps;
}

GrayImage product(const GrayImage& x, const GrayImage& y) {
    GrayImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) out.pixels()[i] = x.pixels()[i] * y.pixels()[i];
    return out;
}

// Local Gaussian moments of a pair of images.
struct Moments {
    GrayImage mx, my, exx, eyy, exy;
};

Moments moments(const GrayImage& x, const GrayImage& y) {
    const auto& taps = ssim_taps();
    return {separable_blur(x, taps), separable_blur(y, taps), separable_blur(product(x, x), taps),
            separable_blur(product(y, y), taps), separable_blur(product(x, y), taps)};
}

void require_ssim_size(const GrayImage& x, const GrayImage& y) {
    require_same(x, y, "ssim");
    const std::size_t window = 2 * kSsimRadius + 1;
    if (x.height() < window || x.width() < window) {
        throw ShapeError("ssim: images must be at least " + std::to_string(window) + "x" +
                         std::to_string(window) + ", got " + std::to_string(x.height()) + "x" +
                         std::to_string(x.width()));
    }
}

}  // namespace

void LossWeights::validate() const {
    for (double v : {alpha, beta, gamma, alpha1, alpha2, gamma1, gamma2}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValueError("loss weights must be finite and >= 0");
    }
}

TermResult loss_intensity(const GrayImage& f, const GrayImage& a, const GrayImage& b, double alpha1,
                          double alpha2) {
    require_same(f, a, "loss_intensity");
    require_same(f, b, "loss_intensity");
    const double n = static_cast<double>(f.size());
    TermResult r{0.0, GrayImage(f.height(), f.width())};
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double da = f.pixels()[i] - a.pixels()[i];
        const double db = f.pixels()[i] - b.pixels()[i];
        sa += std::abs(da);
        sb += std::abs(db);
        r.grad.pixels()[i] = (alpha1 * sign(da) + alpha2 * sign(db)) / n;
    }
    r.value = alpha1 * sa / n + alpha2 * sb / n;
    return r;
}

GrayImage gradient_magnitude(const GrayImage& x, GradientOperator op) {
    const auto [kx, ky] = kernels(op);
    const GrayImage gx = correlate3x3(x, *kx);
    const GrayImage gy = correlate3x3(x, *ky);
    GrayImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.pixels()[i] = std::abs(gx.pixels()[i]) + std::abs(gy.pixels()[i]);
    }
    return out;
}

TermResult loss_texture(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                        GradientOperator op) {
    require_same(f, a, "loss_texture");
    require_same(f, b, "loss_texture");
    const auto [kx, ky] = kernels(op);
    const GrayImage fx = correlate3x3(f, *kx);
    const GrayImage fy = correlate3x3(f, *ky);
    const GrayImage ga = gradient_magnitude(a, op);
    const GrayImage gb = gradient_magnitude(b, op);
    const double n = static_cast<double>(f.size());

    GrayImage dx(f.height(), f.width()), dy(f.height(), f.width());
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double vx = fx.pixels()[i];
        const double vy = fy.pixels()[i];
        const double target = std::max(ga.pixels()[i], gb.pixels()[i]);
        const double diff = std::abs(vx) + std::abs(vy) - target;
        sum += std::abs(diff);
        const double s = sign(diff) / n;
        dx.pixels()[i] = s * sign(vx);
        dy.pixels()[i] = s * sign(vy);
    }
    TermResult r{sum / n, correlate3x3_adjoint(dx, *kx)};
    const GrayImage gy_part = correlate3x3_adjoint(dy, *ky);
    for (std::size_t i = 0; i < f.size(); ++i) r.grad.pixels()[i] += gy_part.pixels()[i];
    return r;
}

GrayImage ssim_map(const GrayImage& x, const GrayImage& y) {
    require_ssim_size(x, y);
    const Moments m = moments(x, y);
    GrayImage out(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mx = m.mx.pixels()[i], my = m.my.pixels()[i];
        const double vx = m.exx.pixels()[i] - mx * mx;
        const double vy = m.eyy.pixels()[i] - my * my;
        const double cxy = m.exy.pixels()[i] - mx * my;
        out.pixels()[i] = ((2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2)) /
                          ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
    }
    return out;
}

double ssim(const GrayImage& x, const GrayImage& y) {
    const GrayImage map = ssim_map(x, y);
    return std::accumulate(map.pixels().begin(), map.pixels().end(), 0.0) /
           static_cast<double>(map.size());
}

GrayImage ssim_gradient(const GrayImage& x, const GrayImage& y) {
    require_ssim_size(x, y);
    const Moments m = moments(x, y);
    const double n = static_cast<double>(x.size());
    // Partial derivatives of the per-pixel SSIM with respect to the local
    // moments E[x], E[x^2] and E[xy]; each is scattered back through the window.
    GrayImage d_mx(x.height(), x.width()), d_exx(x.height(), x.width()), d_exy(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mx = m.mx.pixels()[i], my = m.my.pixels()[i];
        const double vx = m.exx.pixels()[i] - mx * mx;
        const double vy = m.eyy.pixels()[i] - my * my;
        const double cxy = m.exy.pixels()[i] - mx * my;
        const double a1 = 2.0 * mx * my + kSsimC1;
        const double a2 = 2.0 * cxy + kSsimC2;
        const double b1 = mx * mx + my * my + kSsimC1;
        const double b2 = vx + vy + kSsimC2;
        const double s = (a1 * a2) / (b1 * b2);
        d_mx.pixels()[i] = ((2.0 * my * a2 - 2.0 * my * a1) / (b1 * b2) - s * (2.0 * mx / b1 - 2.0 * mx / b2)) / n;
        d_exx.pixels()[i] = (-s / b2) / n;
        d_exy.pixels()[i] = (2.0 * a1 / (b1 * b2)) / n;
    }
    const auto& taps = ssim_taps();
    const GrayImage g_mx = separable_blur_adjoint(d_mx, taps);
    const GrayImage g_exx = separable_blur_adjoint(d_exx, taps);
    const GrayImage g_exy = separable_blur_adjoint(d_exy, taps);
    GrayImage grad(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        grad.pixels()[i] = g_mx.pixels()[i] + 2.0 * x.pixels()[i] * g_exx.pixels()[i] +
                           y.pixels()[i] * g_exy.pixels()[i];
    }
    return grad;
}

TermResult loss_ssim(const GrayImage& f, const GrayImage& a, const GrayImage& b, double gamma1,
                     double gamma2) {
    require_same(f, a, "loss_ssim");
    require_same(f, b, "loss_ssim");
    TermResult r{gamma1 * (1.0 - ssim(f, a)) + gamma2 * (1.0 - ssim(f, b)),
                 GrayImage(f.height(), f.width())};
    const GrayImage ga = ssim_gradient(f, a);
    const GrayImage gb = ssim_gradient(f, b);
    for (std::size_t i = 0; i < f.size(); ++i) {
        r.grad.pixels()[i] = -gamma1 * ga.pixels()[i] - gamma2 * gb.pixels()[i];
    }
    return r;
}

LossReport loss_total(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                      const LossWeights& w, bool with_grad, GradientOperator op) {
    w.validate();
    const TermResult ti = loss_intensity(f, a, b, w.alpha1, w.alpha2);
    const TermResult tt = loss_texture(f, a, b, op);
    LossReport r;
    r.l_int = ti.value;
    r.l_text = tt.value;
    if (with_grad) {
        const TermResult ts = loss_ssim(f, a, b, w.gamma1, w.gamma2);
        r.l_ssim = ts.value;
        GrayImage g(f.height(), f.width());
        for (std::size_t i = 0; i < f.size(); ++i) {
            g.pixels()[i] = w.alpha * ti.grad.pixels()[i] + w.beta * tt.grad.pixels()[i] +
                            w.gamma * ts.grad.pixels()[i];
        }
        r.grad = std::move(g);
    } else {
        r.l_ssim = w.gamma1 * (1.0 - ssim(f, a)) + w.gamma2 * (1.0 - ssim(f, b));
    }
    r.total = w.alpha * r.l_int + w.beta * r.l_text + w.gamma * r.l_ssim;
    if (!std::isfinite(r.total)) throw NumericError("loss_total: non-finite loss");
    return r;
}

GradcheckReport gradcheck(const GrayImage& f, const GrayImage& a, const GrayImage& b,
                          const LossWeights& w, const GradcheckOptions& opt) {
    const double h = opt.step;
    if (!(h > 0.0)) throw ValueError("gradcheck: step must be positive");
    const LossReport base = loss_total(f, a, b, w, true, opt.op);
    const GrayImage& analytic = *base.grad;
    const std::size_t H = f.height(), W = f.width();

    // Kink flags. A perturbation of h moves a 3x3 response by at most 8h and
    // the aggregated |Gx|+|Gy| by at most 16h.
    std::vector<char> kink(f.size(), 0);
    if (opt.avoid_kinks) {
        const double margin = 10.0 * h;
        if (w.alpha > 0.0) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double fa = std::abs(f.pixels()[i] - a.pixels()[i]);
                const double fb = std::abs(f.pixels()[i] - b.pixels()[i]);
                if ((w.alpha1 > 0.0 && fa <= margin) || (w.alpha2 > 0.0 && fb <= margin)) kink[i] = 1;
            }
        }
        if (w.beta > 0.0) {
            const auto [kx, ky] = kernels(opt.op);
            const GrayImage fx = correlate3x3(f, *kx);
            const GrayImage fy = correlate3x3(f, *ky);
            const GrayImage ga = gradient_magnitude(a, opt.op);
            const GrayImage gb = gradient_magnitude(b, opt.op);
            for (std::size_t y = 0; y < H; ++y) {
                for (std::size_t x = 0; x < W; ++x) {
                    const std::size_t p = y * W + x;
                    const double vx = fx.pixels()[p], vy = fy.pixels()[p];
                    const double d = std::abs(vx) + std::abs(vy) - std::max(ga.pixels()[p], gb.pixels()[p]);
                    const bool near = std::abs(vx) <= 8.0 * margin || std::abs(vy) <= 8.0 * margin ||
                                      std::abs(d) <= 16.0 * margin;
                    if (!near) continue;
                    // Every pixel within one step may feed this response.
                    for (long long dy = -1; dy <= 1; ++dy) {
                        for (long long dx = -1; dx <= 1; ++dx) {
                            const std::size_t qy = reflect_index(static_cast<long long>(y) + dy, H);
                            const std::size_t qx = reflect_index(static_cast<long long>(x) + dx, W);
                            kink[qy * W + qx] = 1;
                        }
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(opt.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.next() % i]);
    }

    GradcheckReport report;
    GrayImage probe = f;
    for (std::size_t idx : order) {
        if (report.samples >= opt.samples) break;
        if (kink[idx]) continue;
        const double original = probe.pixels()[idx];
        probe.pixels()[idx] = original + h;
        const double up = loss_total(probe, a, b, w, false, opt.op).total;
        probe.pixels()[idx] = original - h;
        const double down = loss_total(probe, a, b, w, false, opt.op).total;
        probe.pixels()[idx] = original;

        const double numeric = (up - down) / (2.0 * h);
        const double an = analytic.pixels()[idx];
        const double err = std::abs(an - numeric);
        const double denom = std::max({std::abs(an), std::abs(numeric), opt.floor});
        report.max_rel_error = std::max(report.max_rel_error, err / denom);
        report.max_abs_error = std::max(report.max_abs_error, err);
        report.max_abs_analytic = std::max(report.max_abs_analytic, std::abs(an));
        report.max_abs_numeric = std::max(report.max_abs_numeric, std::abs(numeric));
        ++report.samples;
    }
    return report;
}

}  // namespace wife
