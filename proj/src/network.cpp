#include "wife/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "binio.hpp"
#include "wife/random.hpp"
#include "wife/wavelet.hpp"

namespace wife {

namespace {

constexpr std::string_view kWeightsMagic = "WFW1";
constexpr std::uint32_t kWeightsVersion = 1;

using Dims = std::vector<std::uint32_t>;

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

std::string dims_str(const Dims& d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s + "]";
}

std::string stream_prefix(std::size_t block, std::size_t stream) {
    return "wife." + std::to_string(block) + ".s" + std::to_string(stream + 1) + ".";
}

class TensorSource {
public:
    TensorSource(const WifeWeights& w, const WifeConfig& cfg) : weights_(w) {
        for (const ParamSpec& p : parameter_layout(cfg)) expected_.emplace(p.name, p.dims);
        for (const auto& [name, _] : w.tensors) {
            if (!expected_.contains(name)) throw FormatError("unknown tensor \"" + name + "\"");
        }
    }

    const NamedTensor& get(const std::string& name) const {
        auto it = weights_.tensors.find(name);
        if (it == weights_.tensors.end()) throw FormatError("missing tensor \"" + name + "\"");
        const Dims& want = expected_.at(name);
        if (it->second.dims != want) {
            throw FormatError("tensor \"" + name + "\" has shape " + dims_str(it->second.dims) +
                              ", expected " + dims_str(want));
        }
        return it->second;
    }

    std::vector<double> vec(const std::string& name) const { return get(name).values; }

    Matrix mat(const std::string& name) const {
        const NamedTensor& t = get(name);
        return Matrix(t.dims[0], t.dims[1], t.values);
    }

    Tensor conv(const std::string& name) const {
        const NamedTensor& t = get(name);
        return Tensor(Shape{t.dims[0], t.dims[1], t.dims[2], t.dims[3]}, t.values);
    }

    ConvLayer layer(const std::string& prefix) const {
        return ConvLayer{conv(prefix + ".weight"), vec(prefix + ".bias")};
    }

private:
    const WifeWeights& weights_;
    std::map<std::string, Dims> expected_;
};

Tensor conv_act(const Tensor& x, const ConvLayer& layer, double slope, bool activate) {
    Tensor y = conv2d(x, layer.weight, layer.bias, 1);
    return activate ? leaky_relu(y, slope) : y;
}

// Token-wise two-layer perceptron over the channel axis.
Tensor channel_mlp(const Tensor& x, const StreamParams& p, double slope) {
    const Shape& s = x.shape();
    const std::size_t hidden = p.mlp_b1.size();
    Tensor out(s);
    std::vector<double> token(s.c), mid(hidden);
    for (std::size_t b = 0; b < s.b; ++b) {
        for (std::size_t y = 0; y < s.h; ++y) {
            for (std::size_t xx = 0; xx < s.w; ++xx) {
                for (std::size_t c = 0; c < s.c; ++c) token[c] = x.at(b, c, y, xx);
                for (std::size_t j = 0; j < hidden; ++j) {
                    double acc = p.mlp_b1[j];
                    for (std::size_t c = 0; c < s.c; ++c) acc += token[c] * p.mlp_w1(c, j);
                    mid[j] = acc >= 0.0 ? acc : slope * acc;
                }
                for (std::size_t c = 0; c < s.c; ++c) {
                    double acc = p.mlp_b2[c];
                    for (std::size_t j = 0; j < hidden; ++j) acc += mid[j] * p.mlp_w2(j, c);
                    out.at(b, c, y, xx) = acc;
                }
            }
        }
    }
    return out;
}

GrayImage checked_forward(const GrayImage& i1, const GrayImage& i2, const WifeModel& model) {
    if (!i1.same_size(i2)) {
        throw ShapeError("forward: input sizes differ " + std::to_string(i1.height()) + "x" +
                         std::to_string(i1.width()) + " vs " + std::to_string(i2.height()) + "x" +
                         std::to_string(i2.width()));
    }
    if (i1.height() < 8 || i1.width() < 8) {
        throw ShapeError("forward: images must be at least 8x8, got " + std::to_string(i1.height()) +
                         "x" + std::to_string(i1.width()));
    }
    Tensor f1 = feature_extract(to_tensor(i1), model, 0);
    Tensor f2 = feature_extract(to_tensor(i2), model, 1);
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        std::tie(f1, f2) = wife_block(f1, f2, i, model);
    }
    return from_tensor(fuse_reconstruct(f1, f2, model));
}

}  // namespace

void WifeConfig::validate() const {
    if (channels == 0 || blocks == 0 || window == 0) {
        throw ValueError("config: channels, blocks and window must be positive");
    }
    if (heads == 0 || channels % heads != 0) {
        throw ValueError("config: channels " + std::to_string(channels) + " not divisible by heads " +
                         std::to_string(heads));
    }
    if (reduction == 0 || channels % reduction != 0) {
        throw ValueError("config: channels " + std::to_string(channels) +
                         " not divisible by reduction " + std::to_string(reduction));
    }
    if (mlp_ratio == 0) throw ValueError("config: mlp_ratio must be positive");
    if (!(ln_eps > 0.0)) throw ValueError("config: ln_eps must be positive");
}

const NamedTensor& WifeWeights::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("missing tensor \"" + name + "\"");
    return it->second;
}

std::vector<ParamSpec> parameter_layout(const WifeConfig& cfg) {
    cfg.validate();
    const std::uint32_t c = u32(cfg.channels);
    const std::uint32_t hidden = u32(cfg.channels * cfg.mlp_ratio);
    const std::uint32_t squeezed = u32(cfg.channels / cfg.reduction);
    std::vector<ParamSpec> out;
    auto conv = [&](const std::string& prefix, std::uint32_t cout, std::uint32_t cin, std::uint32_t k) {
        const std::size_t fan_in = std::size_t{cin} * k * k;
        out.push_back({prefix + ".weight", {cout, cin, k, k}, fan_in, false});
        out.push_back({prefix + ".bias", {cout}, fan_in, false});
    };

    for (std::size_t m = 0; m < 2; ++m) {
        const std::string p = "fe.s" + std::to_string(m + 1) + ".";
        conv(p + "1", c, 1, 3);
        conv(p + "2", c, c, 3);
        conv(p + "3", c, c, 3);
    }
    for (std::size_t i = 0; i < cfg.blocks; ++i) {
        for (std::size_t m = 0; m < 2; ++m) {
            const std::string p = stream_prefix(i, m);
            out.push_back({p + "ln1.gain", {c}, 0, true});
            out.push_back({p + "ln1.shift", {c}, 0, false});
            for (const char* band : {"low", "high"}) {
                for (const char* proj : {"wq", "wk", "wv", "wo"}) {
                    out.push_back({p + "attn." + band + "." + proj, {c, c}, c, false});
                }
            }
            out.push_back({p + "cbam.ca_mlp1", {squeezed, c}, c, false});
            out.push_back({p + "cbam.ca_mlp2", {c, squeezed}, squeezed, false});
            out.push_back({p + "cbam.sa_conv", {1, 2, 7, 7}, 2 * 49, false});
            out.push_back({p + "cbam.sa_bias", {1}, 2 * 49, false});
            out.push_back({p + "ln2.gain", {c}, 0, true});
            out.push_back({p + "ln2.shift", {c}, 0, false});
            out.push_back({p + "mlp.w1", {c, hidden}, c, false});
            out.push_back({p + "mlp.b1", {hidden}, c, false});
            out.push_back({p + "mlp.w2", {hidden, c}, hidden, false});
            out.push_back({p + "mlp.b2", {c}, hidden, false});
        }
    }
    conv("fuse.1", c, 2 * c, 3);
    conv("fuse.2", c, c, 3);
    conv("fuse.3", 1, c, 3);
    return out;
}

WifeWeights init_weights(const WifeConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    WifeWeights w;
    for (const ParamSpec& p : parameter_layout(cfg)) {
        std::size_t n = 1;
        for (auto d : p.dims) n *= d;
        NamedTensor t{p.dims, std::vector<double>(n, p.unit ? 1.0 : 0.0)};
        if (p.fan_in > 0) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
            for (double& v : t.values) v = rng.uniform(-bound, bound);
        }
        w.tensors.emplace(p.name, std::move(t));
    }
    return w;
}

WifeWeights residual_identity_weights(const WifeConfig& cfg, std::uint64_t seed) {
    WifeWeights w = init_weights(cfg, seed);
    for (auto& [name, t] : w.tensors) {
        if (!name.starts_with("wife.")) continue;
        if (name.ends_with(".wo") || name.ends_with("mlp.w2") || name.ends_with("mlp.b2")) {
            std::fill(t.values.begin(), t.values.end(), 0.0);
        }
    }
    return w;
}

WifeConfig infer_config(const WifeWeights& weights, const WifeConfig& base) {
    WifeConfig cfg = base;
    const NamedTensor& fe_bias = weights.at("fe.s1.1.bias");
    cfg.channels = fe_bias.values.size();
    std::size_t blocks = 0;
    while (weights.tensors.contains(stream_prefix(blocks, 0) + "ln1.gain")) ++blocks;
    if (blocks == 0) throw FormatError("weights contain no WIFE blocks");
    cfg.blocks = blocks;
    const NamedTensor& b1 = weights.at(stream_prefix(0, 0) + "mlp.b1");
    const NamedTensor& ca = weights.at(stream_prefix(0, 0) + "cbam.ca_mlp1");
    if (cfg.channels == 0 || ca.dims.size() != 2 || ca.dims[0] == 0) {
        throw FormatError("weights have degenerate channel shapes");
    }
    cfg.mlp_ratio = b1.values.size() / cfg.channels;
    cfg.reduction = cfg.channels / ca.dims[0];
    return cfg;
}

WifeModel WifeModel::build(const WifeWeights& weights, const WifeConfig& cfg) {
    cfg.validate();
    const TensorSource src(weights, cfg);
    WifeModel m;
    m.cfg = cfg;
    for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t k = 0; k < 3; ++k) {
            m.fe[b][k] = src.layer("fe.s" + std::to_string(b + 1) + "." + std::to_string(k + 1));
        }
    }
    m.blocks.resize(cfg.blocks);
    for (std::size_t i = 0; i < cfg.blocks; ++i) {
        for (std::size_t s = 0; s < 2; ++s) {
            const std::string p = stream_prefix(i, s);
            StreamParams& sp = m.blocks[i].stream[s];
            sp.ln1_gain = src.vec(p + "ln1.gain");
            sp.ln1_shift = src.vec(p + "ln1.shift");
            for (auto [band, target] : {std::pair{"low", &sp.attn_low}, std::pair{"high", &sp.attn_high}}) {
                const std::string a = p + "attn." + band + ".";
                *target = AttentionParams{src.mat(a + "wq"), src.mat(a + "wk"), src.mat(a + "wv"),
                                          src.mat(a + "wo"), cfg.heads};
            }
            sp.cbam.ca_mlp1 = src.mat(p + "cbam.ca_mlp1");
            sp.cbam.ca_mlp2 = src.mat(p + "cbam.ca_mlp2");
            sp.cbam.sa_conv = src.conv(p + "cbam.sa_conv");
            sp.cbam.sa_bias = src.vec(p + "cbam.sa_bias")[0];
            sp.ln2_gain = src.vec(p + "ln2.gain");
            sp.ln2_shift = src.vec(p + "ln2.shift");
            sp.mlp_w1 = src.mat(p + "mlp.w1");
            sp.mlp_b1 = src.vec(p + "mlp.b1");
            sp.mlp_w2 = src.mat(p + "mlp.w2");
            sp.mlp_b2 = src.vec(p + "mlp.b2");
        }
    }
    for (std::size_t k = 0; k < 3; ++k) m.fuse[k] = src.layer("fuse." + std::to_string(k + 1));
    return m;
}

Tensor feature_extract(const Tensor& image, const WifeModel& model, std::size_t branch) {
    if (branch > 1) throw ValueError("feature_extract: branch must be 0 or 1");
    Tensor x = image;
    for (const ConvLayer& layer : model.fe[branch]) x = conv_act(x, layer, model.cfg.slope, true);
    return x;
}

std::pair<Tensor, Tensor> wife_block(const Tensor& f1, const Tensor& f2, std::size_t index,
                                     const WifeModel& model, std::array<WifeState, 2>& trace) {
    if (index >= model.blocks.size()) throw ValueError("wife_block: index out of range");
    if (f1.shape() != f2.shape()) {
        throw ShapeError("wife_block: stream shapes differ " + f1.shape().str() + " vs " +
                         f2.shape().str());
    }
    const WifeConfig& cfg = model.cfg;
    const BlockParams& bp = model.blocks[index];
    const StreamParams& s1 = bp.stream[0];
    const StreamParams& s2 = bp.stream[1];
    const Shape& shape = f1.shape();
    const std::size_t even_h = shape.h + shape.h % 2;
    const std::size_t even_w = shape.w + shape.w % 2;
    const std::size_t shift = index % 2 == 0 ? 0 : cfg.window / 2;

    const Tensor spa1 = layer_norm_channels(f1, s1.ln1_gain, s1.ln1_shift, cfg.ln_eps);
    const Tensor spa2 = layer_norm_channels(f2, s2.ln1_gain, s2.ln1_shift, cfg.ln_eps);
    const SubbandSet d1 = dwt2(reflect_pad_to(spa1, even_h, even_w));
    const SubbandSet d2 = dwt2(reflect_pad_to(spa2, even_h, even_w));

    Tensor low1 = d1.ll, low2 = d2.ll;
    Tensor high1 = pack_high(d1), high2 = pack_high(d2);
    if (cfg.use_ifsa) {
        std::tie(low1, low2) = ifsa(low1, low2, s1.attn_low, s2.attn_low, cfg.window, shift, cfg.wiring);
        std::tie(high1, high2) =
            ifsa(high1, high2, s1.attn_high, s2.attn_high, cfg.window, shift, cfg.wiring);
    }

    Tensor fre1, fre2;
    if (cfg.use_ifi) {
        std::tie(fre1, fre2) = ifi(low1, low2, high1, high2, s1.cbam, s2.cbam);
    } else {
        const std::array<Tensor, 2> p1{low1, high1};
        const std::array<Tensor, 2> p2{low2, high2};
        fre1 = concat_batch(p1);
        fre2 = concat_batch(p2);
    }

    auto restore = [&](const Tensor& packed) {
        auto parts = split_batch(packed, 4);
        const SubbandSet s{parts[0], parts[1], parts[2], parts[3]};
        return crop(iwt2(s), shape.h, shape.w);
    };
    const Tensor prime1 = add(restore(fre1), f1);
    const Tensor prime2 = add(restore(fre2), f2);

    auto tail = [&](const Tensor& prime, const StreamParams& sp) {
        const Tensor normed = layer_norm_channels(prime, sp.ln2_gain, sp.ln2_shift, cfg.ln_eps);
        return add(channel_mlp(normed, sp, cfg.slope), prime);
    };
    Tensor out1 = tail(prime1, s1);
    Tensor out2 = tail(prime2, s2);

    trace[0] = WifeState{f1, spa1, fre1, prime1, out1};
    trace[1] = WifeState{f2, spa2, fre2, prime2, out2};
    return {std::move(out1), std::move(out2)};
}

std::pair<Tensor, Tensor> wife_block(const Tensor& f1, const Tensor& f2, std::size_t index,
                                     const WifeModel& model) {
    std::array<WifeState, 2> trace;
    return wife_block(f1, f2, index, model, trace);
}

Tensor fuse_reconstruct(const Tensor& d1, const Tensor& d2, const WifeModel& model) {
    const double slope = model.cfg.slope;
    Tensor x = concat_channels(d1, d2);
    x = conv_act(x, model.fuse[0], slope, true);
    x = conv_act(x, model.fuse[1], slope, true);
    x = conv_act(x, model.fuse[2], slope, model.cfg.final_activation == FinalActivation::leaky);
    for (double& v : x.data()) v = std::clamp(v, 0.0, 1.0);
    return x;
}

GrayImage forward(const GrayImage& i1, const GrayImage& i2, const WifeModel& model) {
    return checked_forward(i1, i2, model);
}

GrayImage forward(const GrayImage& i1, const GrayImage& i2, const WifeWeights& weights,
                  const WifeConfig& cfg) {
    return checked_forward(i1, i2, WifeModel::build(weights, cfg));
}

std::vector<std::uint8_t> encode_weights(const WifeWeights& weights) {
    binio::Writer w;
    w.bytes(kWeightsMagic);
    w.le(kWeightsVersion);
    w.le(u32(weights.tensors.size()));
    for (const auto& [name, t] : weights.tensors) {
        if (name.size() > 0xFFFF) throw FormatError("tensor name too long: " + name.substr(0, 32));
        w.le(static_cast<std::uint16_t>(name.size()));
        w.bytes(name);
        w.le(static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims) w.le(d);
    }
    for (const auto& [name, t] : weights.tensors) {
        std::size_t n = 1;
        for (auto d : t.dims) n *= d;
        if (n != t.values.size()) {
            throw FormatError("tensor \"" + name + "\" holds " + std::to_string(t.values.size()) +
                              " values for shape " + dims_str(t.dims));
        }
        for (double v : t.values) w.le(v);
    }
    const std::uint32_t crc = binio::crc32(w.buffer());
    w.le(crc);
    return std::move(w.buffer());
}

WifeWeights decode_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kWeightsMagic) {
        throw FormatError("bad magic");
    }
    if (bytes.size() < 16) throw FormatError("weights file truncated");
    const auto body = bytes.first(bytes.size() - 4);
    binio::Reader tail(bytes.last(4), "weights");
    const std::uint32_t stored_crc = tail.le<std::uint32_t>();

    binio::Reader r(body, "weights");
    r.take(4);
    const auto version = r.le<std::uint32_t>();
    if (version != kWeightsVersion) {
        throw FormatError("version mismatch: file has " + std::to_string(version) + ", expected " +
                          std::to_string(kWeightsVersion));
    }
    if (binio::crc32(body) != stored_crc) throw FormatError("CRC mismatch");

    const auto count = r.le<std::uint32_t>();
    std::vector<std::pair<std::string, Dims>> table;
    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = r.le<std::uint16_t>();
        std::string name(r.take(len));
        const auto rank = r.le<std::uint8_t>();
        Dims dims(rank);
        for (auto& d : dims) d = r.le<std::uint32_t>();
        if (!seen.insert(name).second) throw FormatError("duplicate tensor \"" + name + "\"");
        table.emplace_back(std::move(name), std::move(dims));
    }
    WifeWeights out;
    for (auto& [name, dims] : table) {
        std::uint64_t n = 1;
        for (auto d : dims) n *= d;
        if (n * 8 > r.remaining()) {
            throw FormatError("shape table inconsistent: tensor \"" + name + "\" " + dims_str(dims) +
                              " exceeds the payload");
        }
        NamedTensor t{dims, std::vector<double>(n)};
        for (double& v : t.values) v = r.le<double>();
        out.tensors.emplace(name, std::move(t));
    }
    if (r.remaining() != 0) {
        throw FormatError("shape table inconsistent: " + std::to_string(r.remaining()) +
                          " trailing payload bytes");
    }
    return out;
}

void save_weights(const WifeWeights& weights, const std::filesystem::path& path) {
    const auto bytes = encode_weights(weights);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

WifeWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open weights file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_weights(bytes);
}

std::uint64_t image_hash(const GrayImage& image) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : image.pixels()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace wife
