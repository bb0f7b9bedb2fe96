#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wife/tensor.hpp"

namespace wife {

// Non-overlapping w x w windows of a (B, C, H, W) map, one (w*w, C) token
// matrix per window. Windows are ordered batch-major, then row-major over
// the grid; tokens row-major inside the window.
struct WindowTokens {
    std::vector<Matrix> windows;
    std::size_t window = 0;
    std::size_t shift = 0;
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;

    bool same_layout(const WindowTokens& o) const {
        return window == o.window && shift == o.shift && batch == o.batch &&
               channels == o.channels && grid_h == o.grid_h && grid_w == o.grid_w;
    }
};

// shift must be 0 or w/2; H and W must already be multiples of w. A shifted
// partition rolls the map by (-shift, -shift) before tiling.
WindowTokens window_partition(const Tensor& x, std::size_t w, std::size_t shift);
Tensor window_merge(const WindowTokens& tokens);

// Projections act on row tokens: Q = X * wq. All matrices are C x C.
struct AttentionParams {
    Matrix wq, wk, wv, wo;
    std::size_t heads = 1;

    std::size_t channels() const { return wq.rows(); }
    void validate() const;
};

// softmax(Q_h K_h^T / sqrt(d)) for each head h; rows are probability vectors.
std::vector<Matrix> attention_probabilities(const Matrix& q, const Matrix& k, std::size_t heads);

// Scaled dot-product attention over already projected tokens, heads
// concatenated and multiplied by wo.
Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& wo,
              std::size_t heads);

// Projects each source with p (q_src*wq, k_src*wk, v_src*wv) and attends
// window by window.
WindowTokens mhsa(const WindowTokens& q_src, const WindowTokens& k_src, const WindowTokens& v_src,
                  const AttentionParams& p);

enum class IfsaWiring {
    paper,    // out1 = MHSA(Q2, K1, V2), out2 = MHSA(Q1, K2, V1)
    swapped,  // out1 = MHSA(Q1, K2, V1), out2 = MHSA(Q2, K1, V2)
};

// Cross-modal attention within one frequency band. Inputs of any spatial
// size are reflect-padded to window multiples and cropped back afterwards.
// Output m is projected by pm.wo.
std::pair<Tensor, Tensor> ifsa(const Tensor& band1, const Tensor& band2, const AttentionParams& p1,
                               const AttentionParams& p2, std::size_t w, std::size_t shift,
                               IfsaWiring wiring = IfsaWiring::paper);

// Plain windowed self-attention (same padding/cropping as ifsa).
Tensor windowed_self_attention(const Tensor& x, const AttentionParams& p, std::size_t w,
                               std::size_t shift);

// Channel MLP C -> C/r -> C (ReLU hidden, no bias) shared by the avg and
// max branches; spatial gate is a 7x7 conv over [mean_c, max_c].
struct CbamParams {
    Matrix ca_mlp1;  // (C/r, C)
    Matrix ca_mlp2;  // (C, C/r)
    Tensor sa_conv;  // (1, 2, 7, 7)
    double sa_bias = 0.0;

    std::size_t channels() const { return ca_mlp1.cols(); }
    void validate() const;
};

Tensor channel_attention(const Tensor& x, const CbamParams& p);
Tensor spatial_attention(const Tensor& x, const CbamParams& p);

// Inter-frequency interaction. high1/high2 are packed (3B, C, H', W').
// Returns the two packed (4B, C, H', W') streams in LL, LH, HL, HH order:
//   stream 1 = [CA1(low1); SA1(high2)], stream 2 = [CA2(low2); SA2(high1)].
std::pair<Tensor, Tensor> ifi(const Tensor& low1, const Tensor& low2, const Tensor& high1,
                              const Tensor& high2, const CbamParams& p1, const CbamParams& p2);

}  // namespace wife
