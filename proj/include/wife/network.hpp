#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wife/attention.hpp"
#include "wife/imageio.hpp"
#include "wife/tensor.hpp"

namespace wife {

enum class FinalActivation { linear, leaky };

struct WifeConfig {
    std::size_t channels = 16;
    std::size_t blocks = 4;
    std::size_t window = 8;
    std::size_t heads = 4;
    std::size_t reduction = 4;
    std::size_t mlp_ratio = 2;
    double slope = 0.1;
    double ln_eps = 1e-5;
    IfsaWiring wiring = IfsaWiring::paper;
    FinalActivation final_activation = FinalActivation::linear;
    // Ablation switches: without IFSA the bands skip attention; without IFI
    // each stream keeps its own bands and no channel/spatial gating happens.
    bool use_ifsa = true;
    bool use_ifi = true;

    void validate() const;
};

struct NamedTensor {
    std::vector<std::uint32_t> dims;
    std::vector<double> values;

    bool operator==(const NamedTensor&) const = default;
};

// Every learnable parameter, keyed by name (see parameter_layout).
struct WifeWeights {
    std::map<std::string, NamedTensor> tensors;

    const NamedTensor& at(const std::string& name) const;
    bool operator==(const WifeWeights&) const = default;
};

struct ParamSpec {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::size_t fan_in = 0;  // 0 marks layer-norm parameters
    bool unit = false;       // layer-norm gain initialised to 1
};

// The complete, ordered name/shape table implied by a configuration.
std::vector<ParamSpec> parameter_layout(const WifeConfig& cfg);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for convs/linears, LN gain 1 and
// shift 0. Deterministic for a given seed.
WifeWeights init_weights(const WifeConfig& cfg, std::uint64_t seed);

// Recovers channels, blocks, mlp_ratio and reduction from tensor shapes;
// the remaining fields are copied from `base`.
// Seeded weights whose attention output projections and second MLP layer are
// zero, so every WIFE block passes its input through unchanged.
WifeWeights residual_identity_weights(const WifeConfig& cfg, std::uint64_t seed);

WifeConfig infer_config(const WifeWeights& weights, const WifeConfig& base = {});

struct ConvLayer {
    Tensor weight;
    std::vector<double> bias;
};

struct StreamParams {
    std::vector<double> ln1_gain, ln1_shift;
    AttentionParams attn_low, attn_high;
    CbamParams cbam;
    std::vector<double> ln2_gain, ln2_shift;
    Matrix mlp_w1;  // (C, ratio*C), row tokens
    std::vector<double> mlp_b1;
    Matrix mlp_w2;  // (ratio*C, C)
    std::vector<double> mlp_b2;
};

struct BlockParams {
    std::array<StreamParams, 2> stream;
};

// Typed view of WifeWeights, validated against a configuration.
struct WifeModel {
    WifeConfig cfg;
    std::array<std::array<ConvLayer, 3>, 2> fe;
    std::vector<BlockParams> blocks;
    std::array<ConvLayer, 3> fuse;

    // Throws FormatError naming any missing, unknown or mis-shaped tensor.
    static WifeModel build(const WifeWeights& weights, const WifeConfig& cfg);
};

// Intermediate features of one block for one modality stream.
struct WifeState {
    Tensor f_sf, f_spa, f_fre, f_prime, f_out;
};

// Three 3x3 convs (1->C->C->C), Leaky-ReLU after each. branch is 0 or 1.
Tensor feature_extract(const Tensor& image, const WifeModel& model, std::size_t branch);

// One WIFE block on both streams. Any spatial size is accepted: features are
// reflect-padded to even size around the wavelet stage and cropped back.
std::pair<Tensor, Tensor> wife_block(const Tensor& f1, const Tensor& f2, std::size_t index,
                                     const WifeModel& model);
std::pair<Tensor, Tensor> wife_block(const Tensor& f1, const Tensor& f2, std::size_t index,
                                     const WifeModel& model, std::array<WifeState, 2>& trace);

// Concat(2C) -> conv 2C->C -> conv C->C -> conv C->1, then clamp to [0,1].
Tensor fuse_reconstruct(const Tensor& d1, const Tensor& d2, const WifeModel& model);

GrayImage forward(const GrayImage& i1, const GrayImage& i2, const WifeModel& model);
GrayImage forward(const GrayImage& i1, const GrayImage& i2, const WifeWeights& weights,
                  const WifeConfig& cfg);

// "WFW1" container: magic, u32 version, u32 count, name/rank/dims table,
// f64 payloads in table order, trailing CRC32. All little-endian.
std::vector<std::uint8_t> encode_weights(const WifeWeights& weights);
WifeWeights decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const WifeWeights& weights, const std::filesystem::path& path);
WifeWeights load_weights(const std::filesystem::path& path);

// FNV-1a over the little-endian bytes of every pixel value.
std::uint64_t image_hash(const GrayImage& image);

}  // namespace wife
