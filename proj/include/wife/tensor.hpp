#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wife/error.hpp"

namespace wife {

struct Shape {
    std::size_t b = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    std::size_t numel() const { return b * c * h * w; }
    std::size_t plane() const { return h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

// Dense (B, C, H, W) array of doubles, row-major.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
        return data_[index(b, c, y, x)];
    }
    double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[index(b, c, y, x)];
    }

    // One (b, c) spatial slice.
    std::span<double> plane(std::size_t b, std::size_t c);
    std::span<const double> plane(std::size_t b, std::size_t c) const;

    bool all_finite() const;
    bool operator==(const Tensor&) const = default;

private:
    std::size_t index(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return ((b * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }

    Shape shape_{};
    std::vector<double> data_;
};

// Row-major 2D matrix used for token stacks and projection weights.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    static Matrix identity(std::size_t n);
    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class PoolKind { avg, max };

// Mirror an index into [0, n) without repeating the edge sample
// (…, 2, 1, | 0, 1, …, n-1, | n-2, …). Valid for any offset.
std::size_t reflect_index(long long i, std::size_t n);

// Cross-correlation with zero padding. kernel is (Cout, Cin, k, k).
Tensor conv2d(const Tensor& input, const Tensor& kernel, std::span<const double> bias,
              int padding);

Matrix softmax_rows(const Matrix& m);

// Normalizes each row over its columns, then gain * x + shift.
Matrix layer_norm(const Matrix& x, std::span<const double> gain, std::span<const double> shift,
                  double eps = 1e-5);

// layer_norm applied to every spatial token of a tensor over the channel axis.
Tensor layer_norm_channels(const Tensor& x, std::span<const double> gain,
                           std::span<const double> shift, double eps = 1e-5);

Tensor pool_global(const Tensor& x, PoolKind kind);

Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
double sigmoid(double v);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor concat_batch(std::span<const Tensor> parts);
// Splits along batch into `parts` equal pieces.
std::vector<Tensor> split_batch(const Tensor& x, std::size_t parts);

// Edge-reflect pad on the bottom/right so the spatial size becomes (h, w).
Tensor reflect_pad_to(const Tensor& x, std::size_t h, std::size_t w);
// Keep the top-left (h, w) region.
Tensor crop(const Tensor& x, std::size_t h, std::size_t w);

}  // namespace wife
