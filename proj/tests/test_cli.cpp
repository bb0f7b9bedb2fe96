#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "wife/bands.hpp"
#include "wife/cli.hpp"
#include "wife/imageio.hpp"
#include "wife/network.hpp"
#include "wife/synthetic.hpp"

using namespace wife;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string line_with(const std::string& text, const std::string& flag) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find(flag + " ") != std::string::npos || line.find(flag + ",") != std::string::npos) return line;
    }
    return "";
}

struct Fixture {
    fs::path dir = testing::scratch_dir("cli");
    std::string a = (dir / "a.pgm").string(), b = (dir / "b.pgm").string(), f = (dir / "f.pgm").string();
    std::string w = (dir / "w.wfw").string();

    Fixture() {
        save_pnm(synthetic_image(1, 26, 22), a);
        save_pnm(synthetic_image(2, 26, 22), b);
        WifeConfig cfg;
        cfg.channels = 8;
        cfg.blocks = 1;
        cfg.heads = 2;
        cfg.reduction = 2;
        save_weights(init_weights(cfg, 3), w);
    }
};

}  // namespace

TEST_CASE("help lists every flag with its default") {
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> docs = {
        {"fuse", {{"--color-from", "a"}, {"--heads", "4"}, {"--window", "8"}, {"--slope", "0.1"},
                  {"--wiring", "paper"}, {"--final", "linear"}}},
        {"fuse-opt", {{"--iters", "500"}, {"--step", "0.05"}, {"--tol", "1e-07"}, {"--init", "average"},
                      {"--seed", "0"}, {"--alpha", "2"}, {"--beta", "10"}, {"--gamma", "1"}, {"--alpha1", "1"},
                      {"--alpha2", "1"}, {"--gamma1", "0.5"}, {"--gamma2", "0.5"}, {"--grad-op", "sobel"}}},
        {"gradcheck", {{"--seed", "0"}, {"--size", "32"}, {"--step", "1e-06"}, {"--samples", "64"}}},
        {"init-weights", {{"--seed", "0"}, {"--channels", "16"}, {"--blocks", "4"}, {"--heads", "4"},
                          {"--reduction", "4"}, {"--mlp-ratio", "2"}}},
        {"metrics", {{"--format", "csv"}}},
    };
    for (const auto& [cmd, flags] : docs) {
        const Run r = run({cmd, "--help"});
        CHECK(r.code == 0);
        for (const auto& [flag, def] : flags) {
            INFO(cmd << " " << flag);
            const std::string line = line_with(r.out, flag);
            CHECK(!line.empty());
            CHECK(r.out.find(line) != std::string::npos);
            CHECK(line.find("[" + def + "]") != std::string::npos);
        }
    }
    const Run top = run({"--help"});
    for (const char* cmd : {"fuse", "fuse-opt", "decompose", "analyze-bands", "metrics", "gradcheck", "init-weights", "selftest"}) {
        CHECK(top.out.find(cmd) != std::string::npos);
    }
}

TEST_CASE("fuse writes a same-size image") {
    Fixture fx;
    const Run r = run({"fuse", fx.a, fx.b, "-w", fx.w, "-o", fx.f});
    CHECK(r.code == 0);
    const GrayImage out = std::get<GrayImage>(load_pnm(fx.f));
    CHECK(out.height() == 26);
    CHECK(out.width() == 22);
    const auto first = testing::read_bytes(fx.f);
    CHECK(run({"fuse", fx.a, fx.b, "-w", fx.w, "-o", fx.f}).code == 0);
    CHECK(testing::read_bytes(fx.f) == first);
}

TEST_CASE("fuse routes RGB through luma and keeps chroma") {
    Fixture fx;
    const GrayImage y = synthetic_image(4, 16, 16);
    RgbImage rgb{y, y, y};
    for (double& v : rgb.r.pixels()) v = std::min(1.0, v + 0.2);
    const std::string c = (fx.dir / "c.ppm").string(), out = (fx.dir / "o.ppm").string();
    save_pnm(rgb, c);
    save_pnm(synthetic_image(5, 16, 16), fx.b);
    const Run r = run({"fuse", c, fx.b, "-w", fx.w, "-o", out, "--color-from", "a"});
    CHECK(r.code == 0);
    CHECK(std::holds_alternative<RgbImage>(load_pnm(out)));
}

TEST_CASE("fuse error exit codes") {
    Fixture fx;
    save_pnm(synthetic_image(6, 16, 16), fx.b);
    const Run size = run({"fuse", fx.a, fx.b, "-w", fx.w, "-o", fx.f});
    CHECK(size.code == kExitInput);
    CHECK(size.err.find("22x26") != std::string::npos);
    CHECK(size.err.find("16x16") != std::string::npos);

    Fixture fy;
    auto bytes = testing::read_bytes(fy.w);
    bytes[bytes.size() / 2] ^= 0x40;
    testing::write_bytes(fy.w, bytes);
    CHECK(run({"fuse", fy.a, fy.b, "-w", fy.w, "-o", fy.f}).code == kExitWeights);
    bytes[0] = 'Z';
    testing::write_bytes(fy.w, bytes);
    const Run magic = run({"fuse", fy.a, fy.b, "-w", fy.w, "-o", fy.f});
    CHECK(magic.code == kExitWeights);
    CHECK(magic.err.find("bad magic") != std::string::npos);

    CHECK(run({"fuse", (fy.dir / "missing.pgm").string(), fy.b, "-w", fy.w, "-o", fy.f}).code == kExitInput);
    CHECK(run({"fuse", fy.a, fy.b, "-o", fy.f}).code == kExitInput);
    CHECK(run({"fuse", fy.a, fy.b, "-w", fy.w, "-o", fy.f, "--heads", "0"}).code == kExitInput);
    CHECK(run({"nonsense"}).code == kExitInput);
}

TEST_CASE("decompose a constant image") {
    const auto dir = testing::scratch_dir("cli_decompose");
    const std::string in = (dir / "c.pgm").string();
    save_pnm(GrayImage(10, 12, 100.0 / 255.0), in);
    const Run r = run({"decompose", in, "-o", (dir / "out").string()});
    CHECK(r.code == 0);
    const GrayImage ll = std::get<GrayImage>(load_pnm(dir / "out" / "ll.pgm"));
    CHECK(ll.height() == 5);
    for (double v : ll.pixels()) CHECK(v == 100.0 / 255.0);
    for (const char* name : {"lh.pgm", "hl.pgm", "hh.pgm"}) {
        const GrayImage band = std::get<GrayImage>(load_pnm(dir / "out" / name));
        for (double v : band.pixels()) CHECK(v == 128.0 / 255.0);
    }
    const SubbandSet s = load_bands(dir / "out" / "subbands.bands");
    for (double v : s.ll.data()) CHECK(v == doctest::Approx(200.0 / 255.0));
    for (double v : s.hh.data()) CHECK(v == 0.0);
}

TEST_CASE("decompose pads odd sizes") {
    const auto dir = testing::scratch_dir("cli_decompose_odd");
    save_pnm(synthetic_image(7, 9, 7), dir / "o.pgm");
    CHECK(run({"decompose", (dir / "o.pgm").string(), "-o", dir.string()}).code == 0);
    CHECK(load_bands(dir / "subbands.bands").shape() == Shape{1, 1, 5, 4});
}

TEST_CASE("metrics on self-fusion") {
    Fixture fx;
    const Run r = run({"metrics", fx.a, fx.a, fx.a});
    CHECK(r.code == 0);
    CHECK(r.out.find("ssim_a,1\n") != std::string::npos);
    CHECK(r.out.find("fmi,1\n") != std::string::npos);
    CHECK(r.out.find("q_w,1\n") != std::string::npos);
    CHECK(run({"metrics", fx.a, fx.b}).code == kExitInput);
}

TEST_CASE("metrics batch mode keeps a stable order") {
    const auto dir = testing::scratch_dir("cli_batch");
    for (const char* name : {"zeta", "alpha", "mid"}) {
        for (const char* suffix : {"_a", "_b", "_f"}) {
            save_pnm(synthetic_image(std::string(suffix)[1] + std::string(name).size(), 16, 16),
                     dir / (std::string(name) + suffix + ".pgm"));
        }
    }
    const Run r = run({"metrics", "--batch", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("triple,metric,value\nalpha,ssim_a,"));
    CHECK(r.out.find("mid,") < r.out.find("zeta,"));
    CHECK(run({"metrics", "--batch", dir.string()}).out == r.out);
}

TEST_CASE("analyze-bands prints the table") {
    Fixture fx;
    const Run r = run({"analyze-bands", fx.a, fx.b, fx.a});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("band,src,ssim_low,ssim_high\nLL,a,1,"));
    CHECK(run({"analyze-bands", fx.a, fx.b, fx.a}).out == r.out);
}

TEST_CASE("fuse-opt writes the image and trace") {
    Fixture fx;
    const std::string trace = (fx.dir / "t.csv").string();
    const Run r = run({"fuse-opt", fx.a, fx.b, "-o", fx.f, "--iters", "5", "--trace", trace});
    CHECK(r.code == 0);
    CHECK(fs::exists(fx.f));
    CHECK(testing::read_bytes(trace).size() > 30);
}

TEST_CASE("gradcheck subcommand") {
    const Run r = run({"gradcheck", "--seed", "7", "--size", "32"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max_rel_err") != std::string::npos);
    CHECK(run({"gradcheck", "--size", "4"}).code == kExitInput);
}

TEST_CASE("init-weights is seeded") {
    const auto dir = testing::scratch_dir("cli_init");
    const std::string p1 = (dir / "1.wfw").string(), p2 = (dir / "2.wfw").string();
    CHECK(run({"init-weights", "-o", p1, "--seed", "9", "--blocks", "1"}).code == 0);
    CHECK(run({"init-weights", "-o", p2, "--seed", "9", "--blocks", "1"}).code == 0);
    CHECK(testing::read_bytes(p1) == testing::read_bytes(p2));
    CHECK(run({"init-weights", "-o", p1, "--heads", "3"}).code == kExitInput);
}

TEST_CASE("selftest passes") {
    const Run r = run({"selftest"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
}
