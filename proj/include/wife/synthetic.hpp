#pragma once

#include <cstdint>

#include "wife/imageio.hpp"

namespace wife {

// Seeded smooth test image: 0.5 plus four random low-frequency cosines,
// values inside (0.02, 0.98).
GrayImage synthetic_image(std::uint64_t seed, std::size_t height, std::size_t width);

}  // namespace wife
