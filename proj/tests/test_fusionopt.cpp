#include <doctest.h>

#include "support.hpp"
#include "wife/fusionopt.hpp"
#include "wife/synthetic.hpp"

using namespace wife;

namespace {

void check_monotone(const OptTrace& trace) {
    for (std::size_t i = 1; i < trace.entries.size(); ++i) {
        CHECK(trace.entries[i].total <= trace.entries[i - 1].total);
    }
}

}  // namespace

TEST_CASE("a = b converges to a") {
    const GrayImage a = synthetic_image(31, 32, 32);
    const OptTrace t = optimize(a, a);
    CHECK(t.iterations <= 500);
    CHECK(t.stop == StopReason::converged);
    CHECK(ssim(t.result, a) > 0.995);
    CHECK(t.entries.back().total < 1e-3);
    check_monotone(t);
}

TEST_CASE("noise start on a = b stays monotone") {
    const GrayImage a = synthetic_image(31, 32, 32);
    OptConfig cfg;
    cfg.init = InitKind::noise;
    cfg.seed = 4;
    const OptTrace t = optimize(a, a, cfg);
    check_monotone(t);
    CHECK(t.entries.back().total < 0.5 * t.entries.front().total);
    CHECK(t.result.in_unit_range());
}

TEST_CASE("pure L1 pull toward a") {
    const GrayImage a = synthetic_image(32, 24, 24), b = synthetic_image(33, 24, 24);
    OptConfig cfg;
    cfg.weights = LossWeights{1.0, 0.0, 0.0, 1.0, 0.0, 0.5, 0.5};
    const OptTrace t = optimize(a, b, cfg);
    double start = 0.0, end = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        start += std::abs(0.5 * (a.pixels()[i] + b.pixels()[i]) - a.pixels()[i]);
        end += std::abs(t.result.pixels()[i] - a.pixels()[i]);
    }
    CHECK(end < 0.05 * start);
    check_monotone(t);
}

TEST_CASE("seeded pair halves the loss with a monotone trace") {
    const testing::Triple p = testing::oracle_triple(5, 32);
    const OptTrace t = optimize(p.a, p.b);
    check_monotone(t);
    CHECK(t.entries.back().total <= 0.5 * t.entries.front().total);
    CHECK(t.result.in_unit_range());
    CHECK(optimize(p.a, p.b).result == t.result);
}

TEST_CASE("trace CSV") {
    const GrayImage a = synthetic_image(34, 16, 16);
    OptConfig cfg;
    cfg.max_iters = 3;
    const OptTrace t = optimize(a, synthetic_image(35, 16, 16), cfg);
    const std::string csv = trace_csv(t);
    CHECK(csv.starts_with("iter,total,l_int,l_text,l_ssim\n0,"));
    CHECK(t.entries.size() == t.iterations + 1);
}

TEST_CASE("optimizer input checks") {
    CHECK_THROWS_AS(optimize(GrayImage(8, 8), GrayImage(8, 8)), ShapeError);
    CHECK_THROWS_AS(optimize(GrayImage(16, 16), GrayImage(16, 17)), ShapeError);
    OptConfig cfg;
    cfg.step = 0.0;
    CHECK_THROWS_AS(optimize(GrayImage(16, 16), GrayImage(16, 16), cfg), ValueError);
}
