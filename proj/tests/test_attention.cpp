#include <doctest.h>

#include "support.hpp"
#include "wife/attention.hpp"

using namespace wife;

namespace {

AttentionParams random_params(std::uint64_t seed, std::size_t c, std::size_t heads) {
    return {testing::random_matrix(seed, c, c, 0.5), testing::random_matrix(seed + 1, c, c, 0.5),
            testing::random_matrix(seed + 2, c, c, 0.5), testing::random_matrix(seed + 3, c, c, 0.5), heads};
}

CbamParams random_cbam(std::uint64_t seed, std::size_t c, std::size_t r) {
    return {testing::random_matrix(seed, c / r, c), testing::random_matrix(seed + 1, c, c / r),
            testing::random_tensor(seed + 2, {1, 2, 7, 7}, -0.3, 0.3), 0.1};
}

CbamParams zero_cbam(std::size_t c, std::size_t r) {
    return {Matrix(c / r, c), Matrix(c, c / r), Tensor(Shape{1, 2, 7, 7}), 0.0};
}

}  // namespace

TEST_CASE("window partition layout") {
    const Tensor x = testing::random_tensor(1, {1, 1, 8, 8});
    const WindowTokens one = window_partition(x, 8, 0);
    CHECK(one.windows.size() == 1);
    CHECK(one.windows[0].rows() == 64);

    const WindowTokens four = window_partition(x, 4, 0);
    REQUIRE(four.windows.size() == 4);
    CHECK(four.windows[3](0, 0) == x.at(0, 0, 4, 4));
    CHECK(four.windows[1](0, 0) == x.at(0, 0, 0, 4));
}

TEST_CASE("merge inverts partition, with and without shift") {
    const Tensor x = testing::random_tensor(2, {2, 3, 16, 8});
    CHECK(window_merge(window_partition(x, 8, 0)) == x);
    CHECK(window_merge(window_partition(x, 8, 4)) == x);
    CHECK(window_merge(window_partition(x, 4, 2)) == x);
}

TEST_CASE("shifted partition rolls the map") {
    const Tensor x = testing::random_tensor(3, {1, 1, 8, 8});
    const WindowTokens t = window_partition(x, 4, 2);
    CHECK(t.windows[0](0, 0) == x.at(0, 0, 2, 2));
    // Token (3,3) of the last window wraps to pixel (1,1).
    CHECK(t.windows[3](15, 0) == x.at(0, 0, 1, 1));
}

TEST_CASE("partition rejects bad sizes and shifts") {
    const Tensor x(Shape{1, 1, 12, 8});
    CHECK_THROWS_AS(window_partition(x, 8, 0), ShapeError);
    CHECK_THROWS_AS(window_partition(Tensor(Shape{1, 1, 8, 8}), 8, 3), ValueError);
}

TEST_CASE("attention rows are distributions") {
    const Matrix q = testing::random_matrix(4, 16, 8, 3.0), k = testing::random_matrix(5, 16, 8, 3.0);
    const auto probs = attention_probabilities(q, k, 4);
    CHECK(probs.size() == 4);
    for (const Matrix& p : probs) {
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double s = 0.0;
            for (double v : p.row(r)) {
                CHECK(v >= 0.0);
                s += v;
            }
            CHECK(std::abs(s - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("zero value projection gives zero output") {
    AttentionParams p = random_params(6, 8, 2);
    p.wv = Matrix(8, 8);
    const WindowTokens t = window_partition(testing::random_tensor(7, {1, 8, 8, 8}), 4, 0);
    for (const Matrix& m : mhsa(t, t, t, p).windows) {
        for (double v : m.data()) CHECK(v == 0.0);
    }
}

TEST_CASE("single token per window is W_V then W_O") {
    const AttentionParams p = random_params(8, 4, 2);
    const Tensor x = testing::random_tensor(9, {1, 4, 2, 2});
    const WindowTokens t = window_partition(x, 1, 0);
    const WindowTokens out = mhsa(t, t, t, p);
    for (std::size_t i = 0; i < t.windows.size(); ++i) {
        const Matrix expect = matmul(matmul(t.windows[i], p.wv), p.wo);
        CHECK(testing::max_abs_diff(out.windows[i].data(), expect.data()) < 1e-15);
    }
}

TEST_CASE("heads must divide channels") {
    const AttentionParams p = random_params(10, 6, 4);
    CHECK_THROWS_AS(p.validate(), ShapeError);
}

TEST_CASE("ifsa on identical inputs matches windowed self-attention") {
    const AttentionParams p = random_params(11, 8, 4);
    const Tensor x = testing::random_tensor(12, {3, 8, 8, 16});
    for (std::size_t shift : {0u, 4u}) {
        const auto [o1, o2] = ifsa(x, x, p, p, 8, shift);
        const Tensor self = windowed_self_attention(x, p, 8, shift);
        CHECK(testing::max_abs_diff(o1.data(), self.data()) < 1e-12);
        CHECK(testing::max_abs_diff(o2.data(), self.data()) < 1e-12);
    }
}

TEST_CASE("ifsa symmetry: swapping inputs and params swaps outputs") {
    const AttentionParams p1 = random_params(13, 8, 2), p2 = random_params(17, 8, 2);
    const Tensor x1 = testing::random_tensor(14, {1, 8, 8, 8}), x2 = testing::random_tensor(15, {1, 8, 8, 8});
    const auto [a1, a2] = ifsa(x1, x2, p1, p2, 4, 2);
    const auto [b1, b2] = ifsa(x2, x1, p2, p1, 4, 2);
    CHECK(a1 == b2);
    CHECK(a2 == b1);
}

TEST_CASE("ifsa wiring: zero values on modality 2 zero the first output") {
    const AttentionParams p1 = random_params(18, 8, 2);
    AttentionParams p2 = random_params(22, 8, 2);
    p2.wv = Matrix(8, 8);
    const Tensor x1 = testing::random_tensor(19, {1, 8, 8, 8}), x2 = testing::random_tensor(20, {1, 8, 8, 8});
    const auto [o1, o2] = ifsa(x1, x2, p1, p2, 8, 0);
    for (double v : o1.data()) CHECK(v == 0.0);
    bool any = false;
    for (double v : o2.data()) any = any || v != 0.0;
    CHECK(any);
    // The alternative wiring routes modality-1 values into output 1.
    const auto [s1, s2] = ifsa(x1, x2, p1, p2, 8, 0, IfsaWiring::swapped);
    for (double v : s2.data()) CHECK(v == 0.0);
}

TEST_CASE("ifsa pads to window multiples and crops back") {
    const AttentionParams p = random_params(21, 4, 2);
    const Tensor x = testing::random_tensor(23, {1, 4, 5, 7});
    const auto [o1, o2] = ifsa(x, x, p, p, 4, 2);
    CHECK(o1.shape() == x.shape());
    CHECK(o1.all_finite());
}

TEST_CASE("channel attention") {
    const Tensor x = testing::random_tensor(24, {2, 8, 5, 5});
    const Tensor half = channel_attention(x, zero_cbam(8, 4));
    CHECK(half == scale(x, 0.5));
    const CbamParams p = random_cbam(25, 8, 4);
    const Tensor z = channel_attention(Tensor(Shape{1, 8, 4, 4}), p);
    for (double v : z.data()) CHECK(v == 0.0);

    // Constant input: avg == max, gate = sigmoid(2 MLP(c)).
    std::vector<double> c(8);
    Tensor k(Shape{1, 8, 3, 3});
    for (std::size_t ch = 0; ch < 8; ++ch) {
        c[ch] = 0.1 * static_cast<double>(ch) - 0.3;
        for (double& v : k.plane(0, ch)) v = c[ch];
    }
    std::vector<double> hidden(2, 0.0);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t j = 0; j < 8; ++j) hidden[r] += p.ca_mlp1(r, j) * c[j];
        hidden[r] = std::max(hidden[r], 0.0);
    }
    const Tensor g = channel_attention(k, p);
    for (std::size_t ch = 0; ch < 8; ++ch) {
        double m = 0.0;
        for (std::size_t r = 0; r < 2; ++r) m += p.ca_mlp2(ch, r) * hidden[r];
        CHECK(g.at(0, ch, 1, 1) == doctest::Approx(sigmoid(2 * m) * c[ch]).epsilon(1e-14));
    }
}

TEST_CASE("spatial attention") {
    const Tensor x = testing::random_tensor(26, {1, 4, 6, 6});
    CHECK(spatial_attention(x, zero_cbam(4, 2)) == scale(x, 0.5));
    const CbamParams p = random_cbam(27, 4, 2);
    const Tensor z = spatial_attention(Tensor(Shape{1, 4, 6, 6}), p);
    for (double v : z.data()) CHECK(v == 0.0);
}

TEST_CASE("spatial gate is constant on a constant map away from the border") {
    const CbamParams p = random_cbam(28, 4, 2);
    const Tensor x(Shape{1, 4, 20, 20}, 0.7);
    const Tensor y = spatial_attention(x, p);
    for (std::size_t r = 3; r < 17; ++r) {
        for (std::size_t c = 3; c < 17; ++c) CHECK(y.at(0, 0, r, c) == y.at(0, 0, 3, 3));
    }
}

TEST_CASE("ifi with zero params halves the cross-routed bands") {
    const Tensor low1 = testing::random_tensor(30, {1, 4, 4, 4}), low2 = testing::random_tensor(31, {1, 4, 4, 4});
    const Tensor high1 = testing::random_tensor(32, {3, 4, 4, 4}), high2 = testing::random_tensor(33, {3, 4, 4, 4});
    const auto [s1, s2] = ifi(low1, low2, high1, high2, zero_cbam(4, 2), zero_cbam(4, 2));
    const Tensor parts1[] = {scale(low1, 0.5), scale(high2, 0.5)};
    const Tensor parts2[] = {scale(low2, 0.5), scale(high1, 0.5)};
    CHECK(s1 == concat_batch(parts1));
    CHECK(s2 == concat_batch(parts2));
}

TEST_CASE("ifi symmetry and zero injection") {
    const CbamParams p = random_cbam(34, 4, 2);
    const Tensor low = testing::random_tensor(35, {1, 4, 4, 4});
    const Tensor high = testing::random_tensor(36, {3, 4, 4, 4});
    const auto [a1, a2] = ifi(low, low, high, high, p, p);
    CHECK(a1 == a2);

    const Tensor high2 = testing::random_tensor(37, {3, 4, 4, 4});
    const auto [r1, r2] = ifi(low, low, high, high2, p, random_cbam(40, 4, 2));
    const auto [q1, q2] = ifi(low, low, scale(high, -3.0), high2, p, random_cbam(40, 4, 2));
    CHECK(r1 == q1);
    CHECK(!(r2 == q2));
}
