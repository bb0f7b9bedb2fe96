#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wife/wavelet.hpp"

namespace wife {

// "WBN1", u32 height, u32 width, then LL, LH, HL, HH as little-endian f64
// planes. Only single-plane (1,1,H,W) subband sets are stored.
std::vector<std::uint8_t> encode_bands(const SubbandSet& s);
SubbandSet decode_bands(std::span<const std::uint8_t> bytes);
void save_bands(const SubbandSet& s, const std::filesystem::path& path);
SubbandSet load_bands(const std::filesystem::path& path);

}  // namespace wife
