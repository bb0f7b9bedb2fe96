#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "wife/attention.hpp"
#include "wife/bands.hpp"
#include "wife/cli.hpp"
#include "wife/losses.hpp"
#include "wife/metrics.hpp"
#include "wife/network.hpp"
#include "wife/random.hpp"
#include "wife/synthetic.hpp"
#include "wife/wavelet.hpp"

namespace wife {

namespace {

Tensor random_tensor(Rng& rng, Shape s) {
    Tensor t(s);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

bool check_wavelet() {
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        const Tensor x = random_tensor(rng, {1, 2, 32, 32});
        if (max_abs_diff(iwt2(dwt2(x)).data(), x.data()) >= 1e-12) return false;
    }
    return true;
}

bool check_attention() {
    WifeConfig cfg;
    const WifeModel model = WifeModel::build(init_weights(cfg, 3), cfg);
    const StreamParams& sp = model.blocks[0].stream[0];
    Rng rng(5);
    const Matrix q(64, 16, 0.0);
    Matrix qr = q, kr = q;
    for (double& v : qr.data()) v = rng.uniform(-3.0, 3.0);
    for (double& v : kr.data()) v = rng.uniform(-3.0, 3.0);
    for (const Matrix& p : attention_probabilities(qr, kr, 4)) {
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double s = 0.0;
            for (double v : p.row(r)) s += v;
            if (std::abs(s - 1.0) >= 1e-12) return false;
        }
    }
    const Tensor x = random_tensor(rng, {2, 16, 16, 16});
    const auto [o1, o2] = ifsa(x, x, sp.attn_low, sp.attn_low, 8, 4);
    const Tensor self = windowed_self_attention(x, sp.attn_low, 8, 4);
    if (max_abs_diff(o1.data(), self.data()) >= 1e-12 || max_abs_diff(o2.data(), self.data()) >= 1e-12) {
        return false;
    }
    const Tensor low = random_tensor(rng, {1, 16, 8, 8});
    const Tensor high1 = random_tensor(rng, {3, 16, 8, 8});
    const Tensor high2 = random_tensor(rng, {3, 16, 8, 8});
    const Tensor bumped = add(high1, random_tensor(rng, high1.shape()));
    const auto s_ref = ifi(low, low, high1, high2, sp.cbam, sp.cbam);
    const auto s_bump = ifi(low, low, bumped, high2, sp.cbam, sp.cbam);
    return s_ref.first == s_bump.first;
}

bool check_residual_identity() {
    WifeConfig cfg;
    cfg.blocks = 2;
    const WifeModel model = WifeModel::build(residual_identity_weights(cfg, 9), cfg);
    Rng rng(2);
    const Tensor f1 = random_tensor(rng, {1, 16, 16, 16});
    const Tensor f2 = random_tensor(rng, {1, 16, 16, 16});
    for (std::size_t i = 0; i < cfg.blocks; ++i) {
        const auto [g1, g2] = wife_block(f1, f2, i, model);
        if (!(g1 == f1) || !(g2 == f2)) return false;
    }
    return true;
}

bool check_forward() {
    WifeConfig cfg;
    cfg.blocks = 1;
    const WifeModel model = WifeModel::build(init_weights(cfg, 1), cfg);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{16, 16}, {17, 13}}) {
        const GrayImage a = synthetic_image(1, h, w), b = synthetic_image(2, h, w);
        const GrayImage f = forward(a, b, model);
        if (!f.same_size(a) || !(forward(a, b, model) == f)) return false;
        for (double v : f.pixels()) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

bool check_losses() {
    const GrayImage a = synthetic_image(4, 24, 24), b = synthetic_image(5, 24, 24);
    const GrayImage f = synthetic_image(6, 24, 24);
    const LossReport zero = loss_total(a, a, a, {}, false);
    if (zero.l_int != 0.0 || zero.l_text != 0.0 || std::abs(zero.l_ssim) > 1e-12) return false;
    const double ab = loss_total(f, a, b, {}, false).total, ba = loss_total(f, b, a, {}, false).total;
    if (std::abs(ab - ba) > 1e-12 * std::max(1.0, std::abs(ab))) return false;
    GradcheckOptions opt;
    opt.samples = 16;
    return gradcheck(f, a, b, LossWeights{}, opt).max_rel_error < 1e-4;
}

bool check_metrics() {
    const GrayImage a = synthetic_image(8, 24, 24);
    return q_abf(a, a, a) >= 0.98 && std::abs(q_w(a, a, a) - 1.0) <= 1e-9 && fmi(a, a, a) == 1.0;
}

bool check_formats() {
    WifeConfig cfg;
    cfg.blocks = 1;
    const WifeWeights w = init_weights(cfg, 12);
    auto bytes = encode_weights(w);
    if (!(decode_weights(bytes) == w)) return false;
    bytes[0] ^= 0xff;
    try {
        decode_weights(bytes);
        return false;
    } catch (const FormatError&) {
    }
    Rng rng(4);
    const SubbandSet s = dwt2(random_tensor(rng, {1, 1, 12, 10}));
    const SubbandSet r = decode_bands(encode_bands(s));
    return r.ll == s.ll && r.lh == s.lh && r.hl == s.hl && r.hh == s.hh;
}

}  // namespace

int run_selftest(std::ostream& out) {
    const std::pair<const char*, std::function<bool()>> checks[] = {
        {"wavelet perfect reconstruction", check_wavelet},
        {"attention contracts", check_attention},
        {"residual identity", check_residual_identity},
        {"forward shape and determinism", check_forward},
        {"loss axioms and gradient", check_losses},
        {"metric self-fusion", check_metrics},
        {"format round trips", check_formats},
    };
    int failures = 0;
    for (const auto& [name, fn] : checks) {
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            out << "  " << name << ": " << e.what() << "\n";
        }
        out << (ok ? "PASS " : "FAIL ") << name << "\n";
        failures += ok ? 0 : 1;
    }
    return failures == 0 ? kExitOk : kExitInternal;
}

}  // namespace wife
