#include "wife/fusionopt.hpp"

#include <algorithm>
#include <cmath>

#include "wife/metrics.hpp"
#include "wife/random.hpp"

namespace wife {

namespace {

GrayImage initial_image(const GrayImage& a, const GrayImage& b, const OptConfig& cfg) {
    switch (cfg.init) {
        case InitKind::source_a: return a;
        case InitKind::source_b: return b;
        case InitKind::noise: {
            Rng rng(cfg.seed);
            GrayImage out(a.height(), a.width());
            for (double& v : out.pixels()) v = rng.uniform();
            return out;
        }
        case InitKind::average: break;
    }
    GrayImage out(a.height(), a.width());
    for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = 0.5 * (a.pixels()[i] + b.pixels()[i]);
    return out;
}

TraceEntry entry(std::size_t iter, const LossReport& r) {
    return TraceEntry{iter, r.total, r.l_int, r.l_text, r.l_ssim};
}

}  // namespace

void OptConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValueError("optimize: step must be positive");
    if (max_iters < 1) throw ValueError("optimize: max_iters must be at least 1");
    if (!(tolerance >= 0.0)) throw ValueError("optimize: tolerance must be non-negative");
    weights.validate();
}

OptTrace optimize(const GrayImage& a, const GrayImage& b, const OptConfig& cfg) {
    cfg.validate();
    if (!a.same_size(b)) throw ShapeError("optimize: source sizes differ");
    if (a.height() < 16 || a.width() < 16) throw ShapeError("optimize: images must be at least 16x16");

    OptTrace trace;
    GrayImage f = initial_image(a, b, cfg);
    LossReport current = loss_total(f, a, b, cfg.weights, true, cfg.op);
    trace.entries.push_back(entry(0, current));
    const double pixel_scale = static_cast<double>(f.size());

    GrayImage candidate(f.height(), f.width());
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const GrayImage& grad = *current.grad;
        double step = cfg.step * pixel_scale;
        bool accepted = false;
        LossReport next;
        for (std::size_t halving = 0; halving <= cfg.max_halvings; ++halving, step *= 0.5) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                candidate.pixels()[i] = std::clamp(f.pixels()[i] - step * grad.pixels()[i], 0.0, 1.0);
            }
            next = loss_total(candidate, a, b, cfg.weights, true, cfg.op);
            if (!std::isfinite(next.total)) {
                throw NumericError("optimize: non-finite loss at iteration " + std::to_string(iter));
            }
            if (next.total <= current.total) {
                accepted = true;
                break;
            }
        }
        trace.iterations = iter;
        if (!accepted) {
            trace.stop = StopReason::converged;
            break;
        }
        const double previous = current.total;
        f = candidate;
        current = std::move(next);
        trace.entries.push_back(entry(iter, current));
        const double change = previous - current.total;
        if (change <= cfg.tolerance * std::max(std::abs(previous), 1e-300)) {
            trace.stop = StopReason::converged;
            break;
        }
    }
    trace.result = std::move(f);
    return trace;
}

std::string trace_csv(const OptTrace& trace) {
    std::string out = "iter,total,l_int,l_text,l_ssim\n";
    for (const TraceEntry& e : trace.entries) {
        out += std::to_string(e.iter) + "," + format_value(e.total) + "," + format_value(e.l_int) + "," +
               format_value(e.l_text) + "," + format_value(e.l_ssim) + "\n";
    }
    return out;
}

}  // namespace wife
