#pragma once

#include <array>
#include <span>
#include <vector>

#include "wife/imageio.hpp"

namespace wife {

using Kernel3 = std::array<double, 9>;  // row-major 3x3

inline constexpr Kernel3 kSobelX{-1, 0, 1, -2, 0, 2, -1, 0, 1};
inline constexpr Kernel3 kSobelY{-1, -2, -1, 0, 0, 0, 1, 2, 1};
inline constexpr Kernel3 kForwardDiffX{0, 0, 0, 0, -1, 1, 0, 0, 0};
inline constexpr Kernel3 kForwardDiffY{0, 0, 0, 0, -1, 0, 0, 1, 0};

// 3x3 cross-correlation with reflect padding, and its exact adjoint
// (reflected taps are folded back onto the pixels they came from).
GrayImage correlate3x3(const GrayImage& x, const Kernel3& k);
GrayImage correlate3x3_adjoint(const GrayImage& g, const Kernel3& k);

// Normalized 1D Gaussian of length 2*radius+1.
std::vector<double> gaussian_taps(int radius, double sigma);

// Separable blur with reflect padding, and its adjoint.
GrayImage separable_blur(const GrayImage& x, std::span<const double> taps);
GrayImage separable_blur_adjoint(const GrayImage& g, std::span<const double> taps);

}  // namespace wife
