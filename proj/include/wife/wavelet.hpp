#pragma once

#include "wife/tensor.hpp"

namespace wife {

// Single-level orthonormal 2D Haar subbands, each (B, C, H/2, W/2).
// lh holds vertical detail (row differences), hl horizontal detail.
struct SubbandSet {
    Tensor ll, lh, hl, hh;

    const Shape& shape() const { return ll.shape(); }
};

// Throws ShapeError for odd H or W; pad upstream (edge reflection).
SubbandSet dwt2(const Tensor& x);
Tensor iwt2(const SubbandSet& s);

// Stacks [LH; HL; HH] along the batch axis: (3B, C, H', W').
Tensor pack_high(const SubbandSet& s);
SubbandSet unpack(const Tensor& packed_low, const Tensor& packed_high);

}  // namespace wife
