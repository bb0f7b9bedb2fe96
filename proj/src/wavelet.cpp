#include "wife/wavelet.hpp"

#include <array>

namespace wife {

SubbandSet dwt2(const Tensor& x) {
    const Shape& s = x.shape();
    if (s.h % 2 != 0 || s.w % 2 != 0) {
        throw ShapeError("dwt2: spatial size of " + s.str() +
                         " must be even; reflection-pad the input first");
    }
    const Shape half{s.b, s.c, s.h / 2, s.w / 2};
    SubbandSet out{Tensor(half), Tensor(half), Tensor(half), Tensor(half)};
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < half.h; ++y) {
                for (std::size_t xx = 0; xx < half.w; ++xx) {
                    const double p = x.at(b, c, 2 * y, 2 * xx);
                    const double q = x.at(b, c, 2 * y, 2 * xx + 1);
                    const double r = x.at(b, c, 2 * y + 1, 2 * xx);
                    const double t = x.at(b, c, 2 * y + 1, 2 * xx + 1);
                    out.ll.at(b, c, y, xx) = 0.5 * (p + q + r + t);
                    out.lh.at(b, c, y, xx) = 0.5 * (p + q - r - t);
                    out.hl.at(b, c, y, xx) = 0.5 * (p - q + r - t);
                    out.hh.at(b, c, y, xx) = 0.5 * (p - q - r + t);
                }
            }
        }
    }
    return out;
}

Tensor iwt2(const SubbandSet& s) {
    const Shape& h = s.ll.shape();
    if (s.lh.shape() != h || s.hl.shape() != h || s.hh.shape() != h) {
        throw ShapeError("iwt2: inconsistent subband shapes " + h.str() + ", " + s.lh.shape().str() +
                         ", " + s.hl.shape().str() + ", " + s.hh.shape().str());
    }
    Tensor out(Shape{h.b, h.c, 2 * h.h, 2 * h.w});
    for (std::size_t b = 0; b < h.b; ++b) {
        for (std::size_t c = 0; c < h.c; ++c) {
            for (std::size_t y = 0; y < h.h; ++y) {
                for (std::size_t xx = 0; xx < h.w; ++xx) {
                    const double ll = s.ll.at(b, c, y, xx);
                    const double lh = s.lh.at(b, c, y, xx);
                    const double hl = s.hl.at(b, c, y, xx);
                    const double hh = s.hh.at(b, c, y, xx);
                    out.at(b, c, 2 * y, 2 * xx) = 0.5 * (ll + lh + hl + hh);
                    out.at(b, c, 2 * y, 2 * xx + 1) = 0.5 * (ll + lh - hl - hh);
                    out.at(b, c, 2 * y + 1, 2 * xx) = 0.5 * (ll - lh + hl - hh);
                    out.at(b, c, 2 * y + 1, 2 * xx + 1) = 0.5 * (ll - lh - hl + hh);
                }
            }
        }
    }
    return out;
}

Tensor pack_high(const SubbandSet& s) {
    const std::array<Tensor, 3> highs{s.lh, s.hl, s.hh};
    return concat_batch(highs);
}

SubbandSet unpack(const Tensor& packed_low, const Tensor& packed_high) {
    const Shape& lo = packed_low.shape();
    const Shape& hi = packed_high.shape();
    if (hi.b != 3 * lo.b || hi.c != lo.c || hi.h != lo.h || hi.w != lo.w) {
        throw ShapeError("unpack: high stack " + hi.str() + " must be 3x the batch of low " +
                         lo.str());
    }
    auto parts = split_batch(packed_high, 3);
    return SubbandSet{packed_low, std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

}  // namespace wife
