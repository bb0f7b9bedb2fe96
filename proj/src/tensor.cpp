#include "wife/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wife {

namespace {

void require_same(const Shape& a, const Shape& b, const char* op) {
    if (a != b) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
    }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
    Tensor out(x.shape());
    auto src = x.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same(a.shape(), b.shape(), op);
    Tensor out(a.shape());
    auto x = a.data();
    auto y = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = f(x[i], y[i]);
    return out;
}

}  // namespace

std::string Shape::str() const {
    return "(" + std::to_string(b) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_.str());
    }
}

std::span<double> Tensor::plane(std::size_t b, std::size_t c) {
    return {data_.data() + index(b, c, 0, 0), shape_.plane()};
}

std::span<const double> Tensor::plane(std::size_t b, std::size_t c) const {
    return {data_.data() + index(b, c, 0, 0), shape_.plane()};
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::size_t reflect_index(long long i, std::size_t n) {
    if (n == 1) return 0;
    const long long period = 2 * (static_cast<long long>(n) - 1);
    long long r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<long long>(n)) r = period - r;
    return static_cast<std::size_t>(r);
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::span<const double> bias,
              int padding) {
    const Shape& in = input.shape();
    const Shape& ks = kernel.shape();
    if (ks.c != in.c) {
        throw ShapeError("conv2d: kernel " + ks.str() + " expects " + std::to_string(ks.c) +
                         " input channels, input is " + in.str());
    }
    if (ks.h != ks.w || ks.h % 2 == 0) {
        throw ShapeError("conv2d: kernel must be square with odd size, got " + ks.str());
    }
    if (bias.size() != ks.b) {
        throw ShapeError("conv2d: bias length " + std::to_string(bias.size()) +
                         " does not match kernel " + ks.str());
    }
    if (padding < 0 || static_cast<std::size_t>(2 * padding) + 1 != ks.h) {
        throw ShapeError("conv2d: padding " + std::to_string(padding) +
                         " does not preserve size for kernel " + ks.str());
    }

    const long long H = static_cast<long long>(in.h);
    const long long W = static_cast<long long>(in.w);
    const long long k = static_cast<long long>(ks.h);
    Tensor out(Shape{in.b, ks.b, in.h, in.w});
    for (std::size_t b = 0; b < in.b; ++b) {
        for (std::size_t co = 0; co < ks.b; ++co) {
            auto dst = out.plane(b, co);
            std::fill(dst.begin(), dst.end(), bias[co]);
            for (std::size_t ci = 0; ci < in.c; ++ci) {
                auto src = input.plane(b, ci);
                for (long long ky = 0; ky < k; ++ky) {
                    for (long long kx = 0; kx < k; ++kx) {
                        const double wgt = kernel.at(co, ci, ky, kx);
                        if (wgt == 0.0) continue;
                        const long long dy = ky - padding;
                        const long long dx = kx - padding;
                        const long long y0 = std::max(0LL, -dy);
                        const long long y1 = std::min(H, H - dy);
                        const long long x0 = std::max(0LL, -dx);
                        const long long x1 = std::min(W, W - dx);
                        for (long long y = y0; y < y1; ++y) {
                            const double* s = src.data() + (y + dy) * W + dx;
                            double* d = dst.data() + y * W;
                            for (long long x = x0; x < x1; ++x) d[x] += wgt * s[x];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto src = m.row(r);
        auto dst = out.row(r);
        if (src.empty()) continue;
        const double peak = *std::max_element(src.begin(), src.end());
        double total = 0.0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = std::exp(src[i] - peak);
            total += dst[i];
        }
        for (double& v : dst) v /= total;
    }
    return out;
}

Matrix layer_norm(const Matrix& x, std::span<const double> gain, std::span<const double> shift,
                  double eps) {
    if (gain.size() != x.cols() || shift.size() != x.cols()) {
        throw ShapeError("layer_norm: affine length " + std::to_string(gain.size()) + "/" +
                         std::to_string(shift.size()) + " vs width " + std::to_string(x.cols()));
    }
    if (!(eps > 0.0)) throw ValueError("layer_norm: eps must be positive");
    const double n = static_cast<double>(x.cols());
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto src = x.row(r);
        auto dst = out.row(r);
        double mean = 0.0;
        for (double v : src) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : src) var += (v - mean) * (v - mean);
        var /= n;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = gain[i] * ((src[i] - mean) * inv) + shift[i];
        }
    }
    return out;
}

Tensor layer_norm_channels(const Tensor& x, std::span<const double> gain,
                           std::span<const double> shift, double eps) {
    const Shape& s = x.shape();
    if (gain.size() != s.c || shift.size() != s.c) {
        throw ShapeError("layer_norm_channels: affine length does not match channels of " +
                         s.str());
    }
    if (!(eps > 0.0)) throw ValueError("layer_norm: eps must be positive");
    Tensor out(s);
    const double n = static_cast<double>(s.c);
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t y = 0; y < s.h; ++y) {
            for (std::size_t xx = 0; xx < s.w; ++xx) {
                double mean = 0.0;
                for (std::size_t c = 0; c < s.c; ++c) mean += x.at(b, c, y, xx);
                mean /= n;
                double var = 0.0;
                for (std::size_t c = 0; c < s.c; ++c) {
                    const double d = x.at(b, c, y, xx) - mean;
                    var += d * d;
                }
                var /= n;
                const double inv = 1.0 / std::sqrt(var + eps);
                for (std::size_t c = 0; c < s.c; ++c) {
                    out.at(b, c, y, xx) = gain[c] * ((x.at(b, c, y, xx) - mean) * inv) + shift[c];
                }
            }
        }
    }
    return out;
}

Tensor pool_global(const Tensor& x, PoolKind kind) {
    const Shape& s = x.shape();
    if (s.plane() == 0) throw ShapeError("pool_global: empty spatial extent in " + s.str());
    Tensor out(Shape{s.b, s.c, 1, 1});
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t c = 0; c < s.c; ++c) {
            auto p = x.plane(b, c);
            if (kind == PoolKind::max) {
                out.at(b, c, 0, 0) = *std::max_element(p.begin(), p.end());
            } else {
                double sum = 0.0;
                for (double v : p) sum += v;
                out.at(b, c, 0, 0) = sum / static_cast<double>(p.size());
            }
        }
    }
    return out;
}

Tensor leaky_relu(const Tensor& x, double slope) {
    return map(x, [slope](double v) { return v >= 0.0 ? v : slope * v; });
}

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    return map(x, [](double v) { return sigmoid(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double av = a(i, k);
            if (av == 0.0) continue;
            auto src = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += av * src[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
    return map(a, [s](double v) { return v * s; });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.b != sb.b || sa.h != sb.h || sa.w != sb.w) {
        throw ShapeError("concat_channels: " + sa.str() + " vs " + sb.str());
    }
    Tensor out(Shape{sa.b, sa.c + sb.c, sa.h, sa.w});
    for (std::size_t n = 0; n < sa.b; ++n) {
        for (std::size_t c = 0; c < sa.c; ++c) std::ranges::copy(a.plane(n, c), out.plane(n, c).begin());
        for (std::size_t c = 0; c < sb.c; ++c) {
            std::ranges::copy(b.plane(n, c), out.plane(n, sa.c + c).begin());
        }
    }
    return out;
}

Tensor concat_batch(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_batch: no inputs");
    Shape s = parts.front().shape();
    std::vector<double> data;
    std::size_t batch = 0;
    for (const Tensor& t : parts) {
        const Shape& ts = t.shape();
        if (ts.c != s.c || ts.h != s.h || ts.w != s.w) {
            throw ShapeError("concat_batch: " + s.str() + " vs " + ts.str());
        }
        batch += ts.b;
        data.insert(data.end(), t.data().begin(), t.data().end());
    }
    s.b = batch;
    return Tensor(s, std::move(data));
}

std::vector<Tensor> split_batch(const Tensor& x, std::size_t parts) {
    const Shape& s = x.shape();
    if (parts == 0 || s.b % parts != 0) {
        throw ShapeError("split_batch: batch of " + s.str() + " is not a multiple of " +
                         std::to_string(parts));
    }
    const Shape piece{s.b / parts, s.c, s.h, s.w};
    const std::size_t n = piece.numel();
    std::vector<Tensor> out;
    out.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) {
        auto first = x.data().begin() + static_cast<std::ptrdiff_t>(p * n);
        out.emplace_back(piece, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
    }
    return out;
}

Tensor reflect_pad_to(const Tensor& x, std::size_t h, std::size_t w) {
    const Shape& s = x.shape();
    if (h < s.h || w < s.w) {
        throw ShapeError("reflect_pad_to: target smaller than input " + s.str());
    }
    if (h == s.h && w == s.w) return x;
    Tensor out(Shape{s.b, s.c, h, w});
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < h; ++y) {
                const std::size_t sy = reflect_index(static_cast<long long>(y), s.h);
                for (std::size_t xx = 0; xx < w; ++xx) {
                    out.at(b, c, y, xx) = x.at(b, c, sy, reflect_index(static_cast<long long>(xx), s.w));
                }
            }
        }
    }
    return out;
}

Tensor crop(const Tensor& x, std::size_t h, std::size_t w) {
    const Shape& s = x.shape();
    if (h > s.h || w > s.w) throw ShapeError("crop: target larger than input " + s.str());
    if (h == s.h && w == s.w) return x;
    Tensor out(Shape{s.b, s.c, h, w});
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t xx = 0; xx < w; ++xx) out.at(b, c, y, xx) = x.at(b, c, y, xx);
            }
        }
    }
    return out;
}

}  // namespace wife
