#include "wife/attention.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace wife {

namespace {

std::size_t round_up(std::size_t n, std::size_t m) { return (n + m - 1) / m * m; }

Matrix columns(const Matrix& m, std::size_t first, std::size_t count) {
    Matrix out(m.rows(), count);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, first + c);
    }
    return out;
}

WindowTokens project(const WindowTokens& src, const Matrix& weight) {
    WindowTokens out = src;
    for (auto& win : out.windows) win = matmul(win, weight);
    return out;
}

void require_square(const Matrix& m, std::size_t n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
        throw ShapeError(std::string("attention: ") + name + " is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
                         std::to_string(n));
    }
}

// Matrix-vector product on the channel axis, column convention.
std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> channel_mlp(const CbamParams& p, std::span<const double> v) {
    auto hidden = matvec(p.ca_mlp1, v);
    for (double& h : hidden) h = std::max(h, 0.0);
    return matvec(p.ca_mlp2, hidden);
}

struct Padded {
    Tensor tensor;
    std::size_t h, w;
};

Padded pad_for_windows(const Tensor& x, std::size_t w) {
    if (w == 0) throw ValueError("window size must be positive");
    const Shape& s = x.shape();
    return {reflect_pad_to(x, round_up(s.h, w), round_up(s.w, w)), s.h, s.w};
}

}  // namespace

WindowTokens window_partition(const Tensor& x, std::size_t w, std::size_t shift) {
    const Shape& s = x.shape();
    if (w == 0 || w > std::min(s.h, s.w)) {
        throw ShapeError("window_partition: window " + std::to_string(w) + " does not fit " + s.str());
    }
    if (s.h % w != 0 || s.w % w != 0) {
        throw ShapeError("window_partition: " + s.str() + " is not a multiple of window " +
                         std::to_string(w) + "; pad first");
    }
    if (shift != 0 && 2 * shift != w) {
        throw ValueError("window_partition: shift must be 0 or w/2, got " + std::to_string(shift));
    }
    WindowTokens out;
    out.window = w;
    out.shift = shift;
    out.batch = s.b;
    out.channels = s.c;
    out.grid_h = s.h / w;
    out.grid_w = s.w / w;
    out.windows.reserve(s.b * out.grid_h * out.grid_w);
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t gy = 0; gy < out.grid_h; ++gy) {
            for (std::size_t gx = 0; gx < out.grid_w; ++gx) {
                Matrix win(w * w, s.c);
                for (std::size_t ty = 0; ty < w; ++ty) {
                    const std::size_t y = (gy * w + ty + shift) % s.h;
                    for (std::size_t tx = 0; tx < w; ++tx) {
                        const std::size_t xx = (gx * w + tx + shift) % s.w;
                        for (std::size_t c = 0; c < s.c; ++c) win(ty * w + tx, c) = x.at(b, c, y, xx);
                    }
                }
                out.windows.push_back(std::move(win));
            }
        }
    }
    return out;
}

Tensor window_merge(const WindowTokens& tok) {
    const std::size_t w = tok.window;
    const Shape s{tok.batch, tok.channels, tok.grid_h * w, tok.grid_w * w};
    if (tok.windows.size() != tok.batch * tok.grid_h * tok.grid_w) {
        throw ShapeError("window_merge: window count does not match the grid");
    }
    Tensor out(s);
    std::size_t index = 0;
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t gy = 0; gy < tok.grid_h; ++gy) {
            for (std::size_t gx = 0; gx < tok.grid_w; ++gx) {
                const Matrix& win = tok.windows[index++];
                if (win.rows() != w * w || win.cols() != s.c) {
                    throw ShapeError("window_merge: malformed window matrix");
                }
                for (std::size_t ty = 0; ty < w; ++ty) {
                    const std::size_t y = (gy * w + ty + tok.shift) % s.h;
                    for (std::size_t tx = 0; tx < w; ++tx) {
                        const std::size_t xx = (gx * w + tx + tok.shift) % s.w;
                        for (std::size_t c = 0; c < s.c; ++c) out.at(b, c, y, xx) = win(ty * w + tx, c);
                    }
                }
            }
        }
    }
    return out;
}

void AttentionParams::validate() const {
    const std::size_t c = wq.rows();
    require_square(wq, c, "wq");
    require_square(wk, c, "wk");
    require_square(wv, c, "wv");
    require_square(wo, c, "wo");
    if (heads == 0 || c % heads != 0) {
        throw ShapeError("attention: " + std::to_string(c) + " channels not divisible by " +
                         std::to_string(heads) + " heads");
    }
}

std::vector<Matrix> attention_probabilities(const Matrix& q, const Matrix& k, std::size_t heads) {
    if (q.cols() != k.cols() || heads == 0 || q.cols() % heads != 0) {
        throw ShapeError("attention_probabilities: incompatible q/k widths or head count");
    }
    const std::size_t d = q.cols() / heads;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Matrix> out;
    out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        Matrix scores = matmul(columns(q, h * d, d), transpose(columns(k, h * d, d)));
        for (double& v : scores.data()) v *= inv_sqrt_d;
        out.push_back(softmax_rows(scores));
    }
    return out;
}

Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& wo,
              std::size_t heads) {
    if (k.rows() != v.rows() || v.cols() != q.cols()) {
        throw ShapeError("attend: q/k/v shapes disagree");
    }
    const std::size_t d = q.cols() / (heads == 0 ? 1 : heads);
    const auto probs = attention_probabilities(q, k, heads);
    Matrix concat(q.rows(), q.cols());
    for (std::size_t h = 0; h < heads; ++h) {
        const Matrix head = matmul(probs[h], columns(v, h * d, d));
        for (std::size_t r = 0; r < head.rows(); ++r) {
            for (std::size_t c = 0; c < d; ++c) concat(r, h * d + c) = head(r, c);
        }
    }
    return matmul(concat, wo);
}

WindowTokens mhsa(const WindowTokens& q_src, const WindowTokens& k_src, const WindowTokens& v_src,
                  const AttentionParams& p) {
    if (!q_src.same_layout(k_src) || !q_src.same_layout(v_src) ||
        q_src.windows.size() != k_src.windows.size() ||
        q_src.windows.size() != v_src.windows.size()) {
        throw ShapeError("mhsa: query/key/value token stacks use different windowing");
    }
    p.validate();
    if (p.channels() != q_src.channels) {
        throw ShapeError("mhsa: params expect " + std::to_string(p.channels()) + " channels, tokens have " +
                         std::to_string(q_src.channels));
    }
    WindowTokens out = q_src;
    for (std::size_t i = 0; i < out.windows.size(); ++i) {
        out.windows[i] = attend(matmul(q_src.windows[i], p.wq), matmul(k_src.windows[i], p.wk),
                                matmul(v_src.windows[i], p.wv), p.wo, p.heads);
    }
    return out;
}

std::pair<Tensor, Tensor> ifsa(const Tensor& band1, const Tensor& band2, const AttentionParams& p1,
                               const AttentionParams& p2, std::size_t w, std::size_t shift,
                               IfsaWiring wiring) {
    if (band1.shape() != band2.shape()) {
        throw ShapeError("ifsa: band shapes differ " + band1.shape().str() + " vs " +
                         band2.shape().str());
    }
    p1.validate();
    p2.validate();
    if (p1.channels() != band1.shape().c || p2.channels() != band1.shape().c) {
        throw ShapeError("ifsa: attention params do not match channels of " + band1.shape().str());
    }
    const Padded x1 = pad_for_windows(band1, w);
    const Padded x2 = pad_for_windows(band2, w);
    const WindowTokens t1 = window_partition(x1.tensor, w, shift);
    const WindowTokens t2 = window_partition(x2.tensor, w, shift);

    const WindowTokens q1 = project(t1, p1.wq), k1 = project(t1, p1.wk), v1 = project(t1, p1.wv);
    const WindowTokens q2 = project(t2, p2.wq), k2 = project(t2, p2.wk), v2 = project(t2, p2.wv);

    // For the paper wiring, stream 1 queries/values come from modality 2 and
    // keys from modality 1; the swapped wiring exchanges those roles.
    const bool paper = wiring == IfsaWiring::paper;
    const WindowTokens& q_for1 = paper ? q2 : q1;
    const WindowTokens& k_for1 = paper ? k1 : k2;
    const WindowTokens& v_for1 = paper ? v2 : v1;
    const WindowTokens& q_for2 = paper ? q1 : q2;
    const WindowTokens& k_for2 = paper ? k2 : k1;
    const WindowTokens& v_for2 = paper ? v1 : v2;

    WindowTokens out1 = t1;
    WindowTokens out2 = t2;
    for (std::size_t i = 0; i < t1.windows.size(); ++i) {
        out1.windows[i] = attend(q_for1.windows[i], k_for1.windows[i], v_for1.windows[i], p1.wo, p1.heads);
        out2.windows[i] = attend(q_for2.windows[i], k_for2.windows[i], v_for2.windows[i], p2.wo, p2.heads);
    }
    return {crop(window_merge(out1), x1.h, x1.w), crop(window_merge(out2), x2.h, x2.w)};
}

Tensor windowed_self_attention(const Tensor& x, const AttentionParams& p, std::size_t w,
                               std::size_t shift) {
    const Padded padded = pad_for_windows(x, w);
    const WindowTokens tokens = window_partition(padded.tensor, w, shift);
    return crop(window_merge(mhsa(tokens, tokens, tokens, p)), padded.h, padded.w);
}

void CbamParams::validate() const {
    const std::size_t c = ca_mlp1.cols();
    const std::size_t hidden = ca_mlp1.rows();
    if (hidden == 0 || ca_mlp2.rows() != c || ca_mlp2.cols() != hidden) {
        throw ShapeError("cbam: channel MLP shapes are inconsistent");
    }
    if (sa_conv.shape() != Shape{1, 2, 7, 7}) {
        throw ShapeError("cbam: spatial conv must be (1,2,7,7), got " + sa_conv.shape().str());
    }
}

Tensor channel_attention(const Tensor& x, const CbamParams& p) {
    p.validate();
    const Shape& s = x.shape();
    if (s.c != p.channels()) {
        throw ShapeError("channel_attention: params expect " + std::to_string(p.channels()) +
                         " channels, input is " + s.str());
    }
    const Tensor avg = pool_global(x, PoolKind::avg);
    const Tensor mx = pool_global(x, PoolKind::max);
    Tensor out(s);
    for (std::size_t b = 0; b < s.b; ++b) {
        const auto a = channel_mlp(p, avg.data().subspan(b * s.c, s.c));
        const auto m = channel_mlp(p, mx.data().subspan(b * s.c, s.c));
        for (std::size_t c = 0; c < s.c; ++c) {
            const double gate = sigmoid(a[c] + m[c]);
            auto src = x.plane(b, c);
            auto dst = out.plane(b, c);
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = gate * src[i];
        }
    }
    return out;
}

Tensor spatial_attention(const Tensor& x, const CbamParams& p) {
    p.validate();
    const Shape& s = x.shape();
    if (s.c == 0) throw ShapeError("spatial_attention: no channels");
    Tensor pooled(Shape{s.b, 2, s.h, s.w});
    for (std::size_t b = 0; b < s.b; ++b) {
        auto mean = pooled.plane(b, 0);
        auto peak = pooled.plane(b, 1);
        std::ranges::copy(x.plane(b, 0), peak.begin());
        for (std::size_t c = 0; c < s.c; ++c) {
            auto src = x.plane(b, c);
            for (std::size_t i = 0; i < src.size(); ++i) {
                mean[i] += src[i];
                peak[i] = std::max(peak[i], src[i]);
            }
        }
        for (double& v : mean) v /= static_cast<double>(s.c);
    }
    const std::array<double, 1> bias{p.sa_bias};
    const Tensor gate = sigmoid(conv2d(pooled, p.sa_conv, bias, 3));
    Tensor out(s);
    for (std::size_t b = 0; b < s.b; ++b) {
        auto g = gate.plane(b, 0);
        for (std::size_t c = 0; c < s.c; ++c) {
            auto src = x.plane(b, c);
            auto dst = out.plane(b, c);
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = g[i] * src[i];
        }
    }
    return out;
}

std::pair<Tensor, Tensor> ifi(const Tensor& low1, const Tensor& low2, const Tensor& high1,
                              const Tensor& high2, const CbamParams& p1, const CbamParams& p2) {
    const Shape& lo = low1.shape();
    if (low2.shape() != lo) throw ShapeError("ifi: low bands differ " + lo.str() + " vs " + low2.shape().str());
    for (const Tensor* hi : {&high1, &high2}) {
        const Shape& hs = hi->shape();
        if (hs.b != 3 * lo.b || hs.c != lo.c || hs.h != lo.h || hs.w != lo.w) {
            throw ShapeError("ifi: packed high band " + hs.str() + " must be 3x the batch of " + lo.str());
        }
    }
    const std::array<Tensor, 2> s1{channel_attention(low1, p1), spatial_attention(high2, p1)};
    const std::array<Tensor, 2> s2{channel_attention(low2, p2), spatial_attention(high1, p2)};
    return {concat_batch(s1), concat_batch(s2)};
}

}  // namespace wife
