#include <doctest.h>

#include "support.hpp"
#include "wife/bands.hpp"
#include "wife/network.hpp"

using namespace wife;

namespace {

WifeConfig tiny() {
    WifeConfig cfg;
    cfg.channels = 4;
    cfg.blocks = 1;
    cfg.heads = 2;
    cfg.reduction = 2;
    return cfg;
}

std::string error_of(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_weights(bytes);
    } catch (const FormatError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("weights round trip bit-exactly") {
    const WifeWeights w = init_weights(tiny(), 1);
    const auto bytes = encode_weights(w);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "WFW1");
    CHECK(decode_weights(bytes) == w);
    CHECK(encode_weights(decode_weights(bytes)) == bytes);

    const auto dir = testing::scratch_dir("formats");
    save_weights(w, dir / "w.wfw");
    CHECK(load_weights(dir / "w.wfw") == w);
    CHECK(testing::read_bytes(dir / "w.wfw") == bytes);
}

TEST_CASE("weights corruption is detected") {
    const auto bytes = encode_weights(init_weights(tiny(), 2));
    auto magic = bytes;
    magic[1] = 'X';
    CHECK(error_of(magic).find("bad magic") != std::string::npos);

    auto payload = bytes;
    payload[payload.size() / 2] ^= 0x01;
    CHECK(error_of(payload).find("CRC") != std::string::npos);

    auto version = bytes;
    version[4] = 9;
    CHECK(error_of(version).find("version") != std::string::npos);

    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 10);
    CHECK(!error_of(cut).empty());
    CHECK_THROWS_AS(load_weights("/nonexistent/w.wfw"), Error);
}

TEST_CASE("bands round trip bit-exactly") {
    const SubbandSet s = dwt2(testing::random_tensor(3, {1, 1, 14, 10}));
    const auto bytes = encode_bands(s);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "WBN1");
    CHECK(bytes.size() == 4 + 8 + 4 * 7 * 5 * 8);
    const SubbandSet r = decode_bands(bytes);
    CHECK(r.ll == s.ll);
    CHECK(r.lh == s.lh);
    CHECK(r.hl == s.hl);
    CHECK(r.hh == s.hh);

    const auto dir = testing::scratch_dir("bands");
    save_bands(s, dir / "x.bands");
    CHECK(load_bands(dir / "x.bands").hh == s.hh);
}

TEST_CASE("bands corruption is detected") {
    auto bytes = encode_bands(dwt2(testing::random_tensor(4, {1, 1, 4, 4})));
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_bands(bad), doctest::Contains("bad magic"), FormatError);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_bands(bytes), FormatError);
    CHECK_THROWS_AS(encode_bands(dwt2(testing::random_tensor(5, {1, 2, 4, 4}))), ShapeError);
}
