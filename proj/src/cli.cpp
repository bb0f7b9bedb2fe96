#include "wife/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "wife/bands.hpp"
#include "wife/fusionopt.hpp"
#include "wife/imageio.hpp"
#include "wife/losses.hpp"
#include "wife/metrics.hpp"
#include "wife/network.hpp"
#include "wife/synthetic.hpp"
#include "wife/wavelet.hpp"

namespace wife {

namespace fs = std::filesystem;

namespace {

// Raised for bad command-line input detected after parsing.
struct InputError : Error {
    using Error::Error;
};

struct ColorPair {
    GrayImage a, b;
    std::optional<YCbCrImage> chroma;
};

AnyImage load_input(const std::string& path) {
    if (!fs::exists(path)) throw InputError("input file not found: " + path);
    return load_pnm(path);
}

std::string dims(const GrayImage& g) {
    return std::to_string(g.width()) + "x" + std::to_string(g.height());
}

// Luma of both inputs plus chroma from the designated RGB input (falls back
// to the other input when the designated one is gray).
ColorPair load_pair(const std::string& a_path, const std::string& b_path, char color_from) {
    const AnyImage a = load_input(a_path);
    const AnyImage b = load_input(b_path);
    ColorPair p{luma(a), luma(b), std::nullopt};
    if (!p.a.same_size(p.b)) {
        throw InputError("input sizes differ: " + a_path + " is " + dims(p.a) + ", " + b_path + " is " +
                         dims(p.b));
    }
    const AnyImage* first = color_from == 'b' ? &b : &a;
    const AnyImage* second = color_from == 'b' ? &a : &b;
    for (const AnyImage* src : {first, second}) {
        if (const auto* rgb = std::get_if<RgbImage>(src)) {
            p.chroma = rgb_to_ycbcr(*rgb);
            break;
        }
    }
    return p;
}

void save_fused(const GrayImage& y, const std::optional<YCbCrImage>& chroma, const std::string& path) {
    if (!chroma) {
        save_pnm(y, path);
        return;
    }
    save_pnm(ycbcr_to_rgb(YCbCrImage{y, chroma->cb, chroma->cr}), path);
}

GrayImage load_gray(const std::string& path) { return luma(load_input(path)); }

GrayImage plane(const Tensor& t);

// Reflect-pads odd sides so the image splits into whole Haar blocks.
GrayImage pad_even(const GrayImage& img) {
    const std::size_t h = img.height() + img.height() % 2, w = img.width() + img.width() % 2;
    if (h == img.height() && w == img.width()) return img;
    return plane(reflect_pad_to(to_tensor(img), h, w));
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + path + " for writing");
    f << text;
}

GrayImage plane(const Tensor& t) {
    const Shape& s = t.shape();
    return GrayImage(s.h, s.w, std::vector<double>(t.data().begin(), t.data().end()));
}

struct NetworkFlags {
    std::size_t heads = 4;
    std::size_t window = 8;
    double slope = 0.1;
    std::string wiring = "paper";
    std::string final_activation = "linear";
    bool no_ifsa = false;
    bool no_ifi = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--heads", heads, "Attention heads")->check(CLI::PositiveNumber);
        cmd->add_option("--window", window, "Attention window size")->check(CLI::PositiveNumber);
        cmd->add_option("--slope", slope, "Leaky-ReLU negative slope")->check(CLI::NonNegativeNumber);
        cmd->add_option("--wiring", wiring, "IFSA query/key/value wiring")->check(CLI::IsMember({"paper", "swapped"}));
        cmd->add_option("--final", final_activation, "Last reconstruction layer activation")
            ->check(CLI::IsMember({"linear", "leaky"}));
        cmd->add_flag("--no-ifsa", no_ifsa, "Ablation: bypass intra-frequency attention");
        cmd->add_flag("--no-ifi", no_ifi, "Ablation: bypass inter-frequency interaction");
    }

    WifeConfig apply(WifeConfig cfg) const {
        cfg.heads = heads;
        cfg.window = window;
        cfg.slope = slope;
        cfg.wiring = wiring == "swapped" ? IfsaWiring::swapped : IfsaWiring::paper;
        cfg.final_activation = final_activation == "leaky" ? FinalActivation::leaky : FinalActivation::linear;
        cfg.use_ifsa = !no_ifsa;
        cfg.use_ifi = !no_ifi;
        return cfg;
    }
};

void add_loss_flags(CLI::App* cmd, LossWeights& w) {
    cmd->add_option("--alpha", w.alpha, "Intensity loss weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--beta", w.beta, "Texture loss weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma", w.gamma, "SSIM loss weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--alpha1", w.alpha1, "Intensity weight for source a")->check(CLI::NonNegativeNumber);
    cmd->add_option("--alpha2", w.alpha2, "Intensity weight for source b")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma1", w.gamma1, "SSIM weight for source a")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma2", w.gamma2, "SSIM weight for source b")->check(CLI::NonNegativeNumber);
}

GradientOperator parse_grad_op(const std::string& s) {
    return s == "forward" ? GradientOperator::forward_difference : GradientOperator::sobel;
}

int cmd_fuse(const std::string& a, const std::string& b, const std::string& weights_path,
             const std::string& out_path, char color_from, const NetworkFlags& flags, std::ostream& out) {
    const ColorPair pair = load_pair(a, b, color_from);
    if (pair.a.height() < 8 || pair.a.width() < 8) {
        throw InputError("inputs must be at least 8x8, got " + dims(pair.a));
    }
    const WifeWeights weights = load_weights(weights_path);
    const WifeConfig cfg = flags.apply(infer_config(weights));
    const WifeModel model = WifeModel::build(weights, cfg);
    const GrayImage fused = forward(pair.a, pair.b, model);
    save_fused(fused, pair.chroma, out_path);
    out << "wrote " << out_path << " (" << dims(fused) << ")\n";
    return kExitOk;
}

int cmd_fuse_opt(const std::string& a, const std::string& b, const std::string& out_path, char color_from,
                 const OptConfig& cfg, const std::string& trace_path, std::ostream& out) {
    const ColorPair pair = load_pair(a, b, color_from);
    const OptTrace trace = optimize(pair.a, pair.b, cfg);
    save_fused(trace.result, pair.chroma, out_path);
    if (!trace_path.empty()) write_text(trace_path, trace_csv(trace), out);
    out << "iterations " << trace.iterations << ", "
        << (trace.stop == StopReason::converged ? "converged" : "max_iters") << ", loss "
        << format_value(trace.entries.front().total) << " -> " << format_value(trace.entries.back().total)
        << "\n";
    return kExitOk;
}

int cmd_decompose(const std::string& input, const std::string& out_dir, std::ostream& out) {
    const SubbandSet s = dwt2(to_tensor(pad_even(load_gray(input))));
    fs::create_directories(out_dir);
    GrayImage ll = plane(s.ll);
    for (double& v : ll.pixels()) v *= 0.5;
    save_pnm(ll, fs::path(out_dir) / "ll.pgm");
    const std::pair<const char*, const Tensor*> highs[] = {{"lh.pgm", &s.lh}, {"hl.pgm", &s.hl}, {"hh.pgm", &s.hh}};
    for (const auto& [name, band] : highs) {
        GrayImage g = plane(*band);
        for (double& v : g.pixels()) v = 0.5 * v + 0.5;
        save_pnm(g, fs::path(out_dir) / name);
    }
    save_bands(s, fs::path(out_dir) / "subbands.bands");
    out << "wrote ll/lh/hl/hh.pgm and subbands.bands to " << out_dir << "\n";
    return kExitOk;
}

int cmd_metrics(const std::vector<std::string>& paths, const std::string& batch_dir, std::ostream& out) {
    if (batch_dir.empty()) {
        if (paths.size() != 3) throw InputError("metrics needs exactly three images: a b fused");
        const GrayImage a = load_gray(paths[0]), b = load_gray(paths[1]), f = load_gray(paths[2]);
        if (!a.same_size(b) || !a.same_size(f)) {
            throw InputError("image sizes differ: " + dims(a) + ", " + dims(b) + ", " + dims(f));
        }
        out << metrics_csv(evaluate(a, b, f));
        return kExitOk;
    }
    // Triples are <name>_a.pgm, <name>_b.pgm, <name>_f.pgm.
    if (!fs::is_directory(batch_dir)) throw InputError("not a directory: " + batch_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(batch_dir)) {
        const std::string file = entry.path().filename().string();
        if (file.size() > 6 && file.ends_with("_a.pgm")) names.push_back(file.substr(0, file.size() - 6));
    }
    std::sort(names.begin(), names.end());
    std::vector<std::future<MetricReport>> jobs;
    for (const std::string& name : names) {
        const fs::path base = fs::path(batch_dir) / name;
        jobs.push_back(std::async(std::launch::async, [base] {
            const GrayImage a = load_gray(base.string() + "_a.pgm");
            const GrayImage b = load_gray(base.string() + "_b.pgm");
            const GrayImage f = load_gray(base.string() + "_f.pgm");
            if (!a.same_size(b) || !a.same_size(f)) throw InputError("image sizes differ in " + base.string());
            return evaluate(a, b, f);
        }));
    }
    out << "triple,metric,value\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        const MetricReport r = jobs[i].get();
        const std::pair<const char*, double> rows[] = {
            {"ssim_a", r.ssim_a}, {"ssim_b", r.ssim_b}, {"q_abf", r.q_abf}, {"q_w", r.q_w}, {"fmi", r.fmi}};
        for (const auto& [metric, value] : rows) out << names[i] << "," << metric << "," << format_value(value) << "\n";
    }
    return kExitOk;
}

int cmd_analyze_bands(const std::string& a, const std::string& b, const std::string& f,
                      const std::string& out_path, std::ostream& out) {
    const GrayImage ia = load_gray(a), ib = load_gray(b), iff = load_gray(f);
    if (!ia.same_size(ib) || !ia.same_size(iff)) {
        throw InputError("image sizes differ: " + dims(ia) + ", " + dims(ib) + ", " + dims(iff));
    }
    write_text(out_path, band_study_csv(band_correlation_study(pad_even(ia), pad_even(ib), pad_even(iff))), out);
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t size, const LossWeights& w, double step, std::size_t samples,
                  const std::string& op, std::ostream& out) {
    if (size < 11) throw InputError("gradcheck size must be at least 11");
    const GrayImage f = synthetic_image(seed * 3 + 0, size, size);
    const GrayImage a = synthetic_image(seed * 3 + 1, size, size);
    const GrayImage b = synthetic_image(seed * 3 + 2, size, size);
    GradcheckOptions opt;
    opt.step = step;
    opt.samples = samples;
    opt.seed = seed;
    opt.op = parse_grad_op(op);
    const GradcheckReport r = gradcheck(f, a, b, w, opt);
    out << "samples " << r.samples << "\n"
        << "max_rel_err " << format_value(r.max_rel_error) << "\n"
        << "max_abs_err " << format_value(r.max_abs_error) << "\n";
    const bool ok = r.samples > 0 && r.max_rel_error < 1e-4;
    out << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : kExitInternal;
}

int cmd_init_weights(const std::string& out_path, std::uint64_t seed, const WifeConfig& cfg, std::ostream& out) {
    save_weights(init_weights(cfg, seed), out_path);
    out << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wavelet intra/inter-frequency image fusion toolkit", "wife"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    // fuse
    std::string a, b, f, output, weights_path, color_from = "a";
    NetworkFlags net;
    auto* fuse = app.add_subcommand("fuse", "Fuse two images with the network");
    fuse->add_option("a", a, "First source image (PGM/PPM)")->required();
    fuse->add_option("b", b, "Second source image (PGM/PPM)")->required();
    fuse->add_option("-w,--weights", weights_path, "Weights file (WFW1)")->required();
    fuse->add_option("-o,--output", output, "Fused output image")->required();
    fuse->add_option("--color-from", color_from, "Source whose Cb/Cr is reused for RGB inputs")
        ->check(CLI::IsMember({"a", "b"}));
    net.add_to(fuse);

    // fuse-opt
    OptConfig opt;
    std::string init = "average", trace_path, grad_op = "sobel";
    auto* fuse_opt = app.add_subcommand("fuse-opt", "Fuse by directly minimizing the fusion loss");
    fuse_opt->add_option("a", a, "First source image")->required();
    fuse_opt->add_option("b", b, "Second source image")->required();
    fuse_opt->add_option("-o,--output", output, "Fused output image")->required();
    fuse_opt->add_option("--color-from", color_from, "Source whose Cb/Cr is reused for RGB inputs")
        ->check(CLI::IsMember({"a", "b"}));
    fuse_opt->add_option("--iters", opt.max_iters, "Maximum iterations")->check(CLI::PositiveNumber);
    fuse_opt->add_option("--step", opt.step, "Initial step per line search")->check(CLI::PositiveNumber);
    fuse_opt->add_option("--tol", opt.tolerance, "Relative loss change for convergence")
        ->check(CLI::NonNegativeNumber);
    fuse_opt->add_option("--init", init, "Initial image")->check(CLI::IsMember({"average", "a", "b", "noise"}));
    fuse_opt->add_option("--seed", opt.seed, "Seed for noise initialisation");
    fuse_opt->add_option("--trace", trace_path, "Write the loss trace CSV here");
    fuse_opt->add_option("--grad-op", grad_op, "Texture gradient operator")->check(CLI::IsMember({"sobel", "forward"}));
    add_loss_flags(fuse_opt, opt.weights);

    // decompose
    std::string out_dir;
    auto* decompose = app.add_subcommand("decompose", "Single-level Haar decomposition of an image");
    decompose->add_option("input", a, "Input image (odd sizes are reflect-padded)")->required();
    decompose->add_option("-o,--output-dir", out_dir, "Directory for ll/lh/hl/hh.pgm and subbands.bands")
        ->required();

    // analyze-bands
    std::string csv_out;
    auto* analyze = app.add_subcommand("analyze-bands", "SSIM between source and fused wavelet subbands");
    analyze->add_option("a", a, "First source image")->required();
    analyze->add_option("b", b, "Second source image")->required();
    analyze->add_option("fused", f, "Fused image")->required();
    analyze->add_option("-o,--output", csv_out, "CSV destination (stdout when omitted)");

    // metrics
    std::vector<std::string> metric_paths;
    std::string batch_dir, format = "csv";
    auto* metrics = app.add_subcommand("metrics", "Fusion quality metrics (SSIM, Q_abf, Q_w, FMI)");
    metrics->add_option("images", metric_paths, "Source a, source b and fused image");
    metrics->add_option("--batch", batch_dir, "Directory of <name>_a/_b/_f.pgm triples");
    metrics->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));

    // gradcheck
    std::uint64_t seed = 0;
    std::size_t size = 32, samples = 64;
    double step = 1e-6;
    LossWeights gc_weights;
    std::string gc_op = "sobel";
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
    grad->add_option("--seed", seed, "Seed of the synthetic triple");
    grad->add_option("--size", size, "Image side length")->check(CLI::Range(11, 4096));
    grad->add_option("--step", step, "Central difference step")->check(CLI::PositiveNumber);
    grad->add_option("--samples", samples, "Pixels to probe")->check(CLI::PositiveNumber);
    grad->add_option("--grad-op", gc_op, "Texture gradient operator")->check(CLI::IsMember({"sobel", "forward"}));
    add_loss_flags(grad, gc_weights);

    // init-weights
    WifeConfig init_cfg;
    std::uint64_t init_seed = 0;
    auto* initw = app.add_subcommand("init-weights", "Write seeded random network weights");
    initw->add_option("-o,--output", output, "Weights file to write")->required();
    initw->add_option("--seed", init_seed, "Initialisation seed");
    initw->add_option("--channels", init_cfg.channels, "Feature channels")->check(CLI::PositiveNumber);
    initw->add_option("--blocks", init_cfg.blocks, "Number of WIFE blocks")->check(CLI::PositiveNumber);
    initw->add_option("--heads", init_cfg.heads, "Attention heads (must divide channels)")->check(CLI::PositiveNumber);
    initw->add_option("--reduction", init_cfg.reduction, "Channel-attention reduction")->check(CLI::PositiveNumber);
    initw->add_option("--mlp-ratio", init_cfg.mlp_ratio, "Hidden width multiple of the block MLP")
        ->check(CLI::PositiveNumber);

    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

    std::vector<const char*> argv{"wife"};
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    try {
        const char from = color_from.empty() ? 'a' : color_from[0];
        if (*fuse) return cmd_fuse(a, b, weights_path, output, from, net, out);
        if (*fuse_opt) {
            opt.init = init == "a" ? InitKind::source_a
                       : init == "b" ? InitKind::source_b
                       : init == "noise" ? InitKind::noise
                                         : InitKind::average;
            opt.op = parse_grad_op(grad_op);
            return cmd_fuse_opt(a, b, output, from, opt, trace_path, out);
        }
        if (*decompose) return cmd_decompose(a, out_dir, out);
        if (*analyze) return cmd_analyze_bands(a, b, f, csv_out, out);
        if (*metrics) return cmd_metrics(metric_paths, batch_dir, out);
        if (*grad) return cmd_gradcheck(seed, size, gc_weights, step, samples, gc_op, out);
        if (*initw) return cmd_init_weights(output, init_seed, init_cfg, out);
        if (*selftest) return run_selftest(out);
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitWeights;
    } catch (const NumericError& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace wife
