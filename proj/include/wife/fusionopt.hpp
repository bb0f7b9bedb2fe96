#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wife/imageio.hpp"
#include "wife/losses.hpp"

namespace wife {

enum class InitKind { average, source_a, source_b, noise };

struct OptConfig {
    std::size_t max_iters = 500;
    // Scales the per-pixel gradient (d total / d f multiplied by H*W), so the
    // step does not depend on image size.
    double step = 0.05;
    LossWeights weights{};
    InitKind init = InitKind::average;
    // Relative loss change below which the run counts as converged.
    double tolerance = 1e-7;
    std::uint64_t seed = 0;  // used by InitKind::noise
    std::size_t max_halvings = 20;
    GradientOperator op = GradientOperator::sobel;

    void validate() const;
};

enum class StopReason { converged, max_iters };

struct TraceEntry {
    std::size_t iter;
    double total, l_int, l_text, l_ssim;
};

struct OptTrace {
    std::vector<TraceEntry> entries;  // entry 0 is the initial image
    std::size_t iterations = 0;
    StopReason stop = StopReason::max_iters;
    GrayImage result;
};

// Projected gradient descent on loss_total with backtracking: the step is
// halved until the loss does not increase. Throws NumericError on a
// non-finite loss.
OptTrace optimize(const GrayImage& a, const GrayImage& b, const OptConfig& cfg = {});

// "iter,total,l_int,l_text,l_ssim" with 9 significant digits.
std::string trace_csv(const OptTrace& trace);

}  // namespace wife
