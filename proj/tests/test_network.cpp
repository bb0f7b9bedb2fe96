#include <doctest.h>

#include <set>

#include "golden.hpp"
#include "support.hpp"
#include "wife/network.hpp"
#include "wife/synthetic.hpp"

using namespace wife;

namespace {

WifeConfig small_config() {
    WifeConfig cfg;
    cfg.channels = 8;
    cfg.blocks = 2;
    cfg.heads = 2;
    cfg.reduction = 2;
    return cfg;
}

void fill(WifeWeights& w, const std::string& prefix, double value) {
    for (auto& [name, t] : w.tensors) {
        if (name.starts_with(prefix)) std::fill(t.values.begin(), t.values.end(), value);
    }
}

}  // namespace

TEST_CASE("parameter layout covers every tensor once") {
    const WifeConfig cfg;
    const auto layout = parameter_layout(cfg);
    std::set<std::string> names;
    for (const ParamSpec& p : layout) CHECK(names.insert(p.name).second);
    CHECK(names.contains("fe.s1.1.weight"));
    CHECK(names.contains("wife.3.s2.attn.high.wo"));
    CHECK(names.contains("fuse.3.bias"));
    CHECK(init_weights(cfg, 0).tensors.size() == layout.size());
}

TEST_CASE("init_weights is seeded") {
    const WifeConfig cfg = small_config();
    const WifeWeights a = init_weights(cfg, 5), b = init_weights(cfg, 5), c = init_weights(cfg, 6);
    CHECK(a == b);
    CHECK(!(a == c));
    for (const auto& [name, t] : a.tensors) {
        if (name.ends_with("ln1.gain") || name.ends_with("ln2.gain")) {
            for (double v : t.values) CHECK(v == 1.0);
        }
    }
}

TEST_CASE("config validation") {
    WifeConfig cfg;
    cfg.heads = 3;
    CHECK_THROWS_AS(cfg.validate(), ValueError);
    cfg = WifeConfig{};
    cfg.reduction = 0;
    CHECK_THROWS_AS(cfg.validate(), ValueError);
}

TEST_CASE("infer_config recovers the architecture") {
    const WifeConfig cfg = small_config();
    const WifeConfig got = infer_config(init_weights(cfg, 1));
    CHECK(got.channels == 8);
    CHECK(got.blocks == 2);
    CHECK(got.reduction == 2);
    CHECK(got.mlp_ratio == 2);
}

TEST_CASE("feature extraction with zero weights") {
    const WifeConfig cfg = small_config();
    WifeWeights w = init_weights(cfg, 2);
    fill(w, "fe.", 0.0);
    const Tensor img = to_tensor(testing::noise_image(1, 9, 11));
    Tensor f = feature_extract(img, WifeModel::build(w, cfg), 0);
    CHECK(f.shape() == Shape{1, 8, 9, 11});
    for (double v : f.data()) CHECK(v == 0.0);

    // Zero kernels, bias -0.5: every layer emits leaky(-0.5).
    for (auto& [name, t] : w.tensors) {
        if (name.starts_with("fe.") && name.ends_with(".bias")) std::fill(t.values.begin(), t.values.end(), -0.5);
    }
    f = feature_extract(img, WifeModel::build(w, cfg), 1);
    for (double v : f.data()) CHECK(v == doctest::Approx(-0.05));
}

TEST_CASE("default feature extractor emits 16 channels") {
    const WifeConfig cfg;
    const Tensor f = feature_extract(to_tensor(testing::noise_image(2, 12, 10)), WifeModel::build(init_weights(cfg, 0), cfg), 0);
    CHECK(f.shape() == Shape{1, 16, 12, 10});
}

TEST_CASE("residual identity weights make every block the identity") {
    const WifeConfig cfg = small_config();
    const WifeModel model = WifeModel::build(residual_identity_weights(cfg, 3), cfg);
    const Tensor f1 = testing::random_tensor(4, {1, 8, 16, 16});
    const Tensor f2 = testing::random_tensor(5, {1, 8, 16, 16});
    for (std::size_t i = 0; i < cfg.blocks; ++i) {
        std::array<WifeState, 2> trace;
        const auto [g1, g2] = wife_block(f1, f2, i, model, trace);
        CHECK(testing::max_abs_diff(g1.data(), f1.data()) == 0.0);
        CHECK(testing::max_abs_diff(g2.data(), f2.data()) == 0.0);
        CHECK(trace[0].f_prime == f1);
    }
}

TEST_CASE("block shapes and symmetry") {
    const WifeConfig cfg = small_config();
    WifeWeights w = init_weights(cfg, 6);
    // Copy stream 1 parameters into stream 2.
    for (auto& [name, t] : w.tensors) {
        const auto pos = name.find(".s2.");
        if (pos != std::string::npos && name.starts_with("wife.")) {
            std::string twin = name;
            twin.replace(pos, 4, ".s1.");
            t = w.tensors.at(twin);
        }
    }
    const WifeModel model = WifeModel::build(w, cfg);
    const Tensor f = testing::random_tensor(7, {1, 8, 11, 13});
    for (std::size_t i = 0; i < 2; ++i) {
        const auto [g1, g2] = wife_block(f, f, i, model);
        CHECK(g1.shape() == f.shape());
        CHECK(g1 == g2);
    }
}

TEST_CASE("zero inputs with zero biases give a constant image") {
    const WifeConfig cfg = small_config();
    WifeWeights w = init_weights(cfg, 8);
    for (auto& [name, t] : w.tensors) {
        if (name.ends_with("bias") || name.ends_with(".b1") || name.ends_with(".b2")) {
            std::fill(t.values.begin(), t.values.end(), 0.0);
        }
    }
    const GrayImage z(16, 16, 0.0);
    const GrayImage f = forward(z, z, w, cfg);
    for (double v : f.pixels()) CHECK(v == 0.0);
}

TEST_CASE("forward shape contract") {
    const WifeConfig cfg = small_config();
    const WifeModel model = WifeModel::build(init_weights(cfg, 9), cfg);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {17, 9}, {24, 31}}) {
        const GrayImage f = forward(testing::noise_image(1, h, w), testing::noise_image(2, h, w), model);
        CHECK(f.height() == h);
        CHECK(f.width() == w);
        CHECK(f.in_unit_range());
    }
    CHECK_THROWS_AS(forward(GrayImage(8, 8), GrayImage(8, 9), model), ShapeError);
    CHECK_THROWS_AS(forward(GrayImage(7, 8), GrayImage(7, 8), model), ShapeError);
}

TEST_CASE("ablation switches change the output") {
    WifeConfig cfg = small_config();
    const WifeWeights w = init_weights(cfg, 10);
    const GrayImage a = synthetic_image(1, 16, 16), b = synthetic_image(2, 16, 16);
    const GrayImage full = forward(a, b, w, cfg);
    cfg.use_ifsa = false;
    CHECK(!(forward(a, b, w, cfg) == full));
}

TEST_CASE("golden output hash") {
    const WifeConfig cfg;
    const GrayImage f = forward(synthetic_image(1, 16, 16), synthetic_image(2, 16, 16), init_weights(cfg, 2024), cfg);
    INFO("hash = " << image_hash(f));
    CHECK(image_hash(f) == kGoldenHash16);
}

TEST_CASE("build reports unknown, missing and misshapen tensors") {
    const WifeConfig cfg = small_config();
    WifeWeights w = init_weights(cfg, 11);
    auto message = [&](const WifeWeights& bad) -> std::string {
        try {
            WifeModel::build(bad, cfg);
        } catch (const FormatError& e) {
            return e.what();
        }
        return "";
    };
    WifeWeights missing = w;
    missing.tensors.erase("fuse.2.weight");
    CHECK(message(missing).find("fuse.2.weight") != std::string::npos);
    WifeWeights extra = w;
    extra.tensors["bogus.tensor"] = NamedTensor{{1}, {0.0}};
    CHECK(message(extra).find("bogus.tensor") != std::string::npos);
    WifeWeights wrong = w;
    wrong.tensors["fuse.3.bias"] = NamedTensor{{2}, {0.0, 0.0}};
    CHECK(message(wrong).find("fuse.3.bias") != std::string::npos);
}
