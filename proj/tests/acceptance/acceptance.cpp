// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance --vfh build/tools/vfh --work DIR [--only 1,2,7]
//
// Criteria 1, 5, 6 and 7 drive the vfh binary as a user would; 2 to 4 call
// the library against independent oracles.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vfh/data/dataset.hpp"
#include "vfh/harness/trainer.hpp"
#include "vfh/losses/feature.hpp"
#include "vfh/losses/frequency.hpp"
#include "vfh/metrics/metrics.hpp"
#include "vfh/signal/dft2.hpp"

using namespace vfh;
using core::Rng;
using core::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

struct Context {
    std::string vfh;
    fs::path work;
};

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs `vfh args`, output appended to `log`. Returns the exit status.
int run_vfh(const Context& ctx, const std::string& args, const fs::path& log) {
    const std::string cmd = quote(ctx.vfh) + " " + args + " >>" + quote(log.string()) + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : 128;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

/// Data rows of a CSV keyed by their first field, comment lines and header skipped.
std::map<std::string, std::vector<double>> csv_rows(const fs::path& p) {
    std::map<std::string, std::vector<double>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::stringstream ss(line);
        std::string key, cell;
        std::getline(ss, key, ',');
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
        rows[key] = v;
    }
    return rows;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1 ------------------------------------------------------------------------

Outcome gradient_suite(const Context& ctx) {
    Outcome o;
    const fs::path log = ctx.work / "gradcheck.log";
    fs::remove(log);
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = run_vfh(ctx, "gradcheck", log);
    const double secs = seconds_since(t0);
    o.require(rc == 0, "vfh gradcheck exited " + std::to_string(rc));
    o.require(secs < 120.0, "took " + fmt("%.1f", secs) + " s");

    const std::string out = slurp(log);
    std::istringstream in(out);
    std::string line;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string status, name;
        if (ls >> status >> name && (status == "PASS" || status == "FAIL")) {
            ++seen[name];
            o.require(status == "PASS", name + " failed");
        }
    }
    for (const char* op : {"conv2d", "depthwise_conv2d", "conv3d", "squeeze_excitation", "multi_kernel", "axial_attention",
                           "pixel_shuffle", "dense", "freq_mse", "weighted_freq_loss", "perceptual_loss", "adversarial_gen",
                           "adversarial_disc", "generator_end_to_end"})
        o.require(seen[op] == 1, std::string(op) + " reported " + std::to_string(seen[op]) + " times");

    const fs::path neg = ctx.work / "gradcheck_negative.log";
    fs::remove(neg);
    o.require(run_vfh(ctx, "gradcheck --negative-control", neg) != 0, "negative control did not fail the run");
    if (o.pass) o.detail = std::to_string(seen.size()) + " ops, " + fmt("%.1f", secs) + " s";
    return o;
}

// 2 ------------------------------------------------------------------------

Outcome dft_oracle() {
    Outcome o;
    Rng rng(2024);
    double worst_dft = 0.0, worst_parseval = 0.0, worst_conj = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t h = 1 + rng.below(16), w = 1 + rng.below(16);
        const Tensor img = core::uniform_tensor({h, w}, rng, -1.0, 1.0);
        const signal::Spectrum s = signal::dft2(img);
        const auto [re, im] = oracle::dft2_direct(img);
        for (std::size_t i = 0; i < h * w; ++i)
            worst_dft = std::max({worst_dft, std::abs(s.real[i] - re[i]), std::abs(s.imag[i] - im[i])});

        double px = 0.0;
        for (double v : img.data()) px += v * v;
        const double fx = signal::spectrum_energy(s) / static_cast<double>(h * w);
        worst_parseval = std::max(worst_parseval, std::abs(px - fx) / std::max(px, 1e-300));

        for (std::size_t v = 0; v < h; ++v)
            for (std::size_t u = 0; u < w; ++u) {
                const auto a = s.at(v, u), b = s.at((h - v) % h, (w - u) % w);
                worst_conj = std::max(worst_conj, std::abs(a - std::conj(b)));
            }
    }
    o.require(worst_dft <= 1e-9, "dft2 vs direct sum " + fmt("%.3g", worst_dft));
    o.require(worst_parseval <= 1e-9, "Parseval " + fmt("%.3g", worst_parseval));
    o.require(worst_conj <= 1e-9, "conjugate symmetry " + fmt("%.3g", worst_conj));
    o.detail = (o.pass ? "" : o.detail + "; ") + "max err dft " + fmt("%.2g", worst_dft) + ", parseval " +
               fmt("%.2g", worst_parseval) + ", conj " + fmt("%.2g", worst_conj);
    return o;
}

// 3 ------------------------------------------------------------------------

fs::path tiny_dataset(const Context& ctx) {
    const fs::path root = ctx.work / "tiny_data";
    if (!fs::exists(root / "splits.csv")) {
        data::DatasetSpec spec;
        spec.seed = 100;
        spec.train = 4;
        spec.val = 1;
        spec.test = 1;
        spec.frames = 8;
        data::generate_dataset(root, spec);
    }
    return root;
}

Outcome loss_identities(const Context& ctx) {
    Outcome o;
    Rng rng(33);

    // Exactly zero on identical inputs.
    const Tensor plane = core::uniform_tensor({16, 16}, rng, 0.0, 1.0);
    const Tensor batch = core::uniform_tensor({2, 3, 16, 16}, rng, 0.0, 1.0);
    model::PerceptNet percept(rng);
    model::SurrogateLipNet lip(rng);
    const Tensor mouths = core::uniform_tensor({1, 5, 1, 48, 64}, rng, 0.0, 1.0);
    const std::pair<const char*, double> zeros[] = {
        {"freq_mse", losses::freq_mse(plane, plane)},
        {"weighted_freq_loss", losses::weighted_freq_loss(plane, plane)},
        {"batch_freq_mse luma", losses::batch_freq_mse(batch, batch).value},
        {"batch_freq_mse per_channel", losses::batch_freq_mse(batch, batch, losses::FreqMode::PerChannel).value},
        {"batch_weighted_freq_loss luma", losses::batch_weighted_freq_loss(batch, batch).value},
        {"batch_weighted_freq_loss per_channel",
         losses::batch_weighted_freq_loss(batch, batch, losses::FreqMode::PerChannel).value},
        {"perceptual_loss", losses::perceptual_loss(percept, batch, batch).value},
        {"lip_reading_loss", losses::lip_reading_loss(lip, mouths, mouths).value},
    };
    for (const auto& [name, v] : zeros) o.require(v == 0.0, std::string(name) + " = " + fmt("%.3g", v));

    // freq_mse / (wh) against pixel MSE.
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t h = 2 + rng.below(31), w = 2 + rng.below(31);
        const Tensor a = core::uniform_tensor({h, w}, rng, 0.0, 1.0), b = core::uniform_tensor({h, w}, rng, 0.0, 1.0);
        double mse = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
        mse /= static_cast<double>(a.size());
        const double spectral = losses::freq_mse(a, b) / static_cast<double>(h * w);
        worst = std::max(worst, std::abs(spectral - mse) / mse);
    }
    o.require(worst <= 1e-8, "freq_mse/(wh) vs pixel MSE " + fmt("%.3g", worst));

    // Total recomposes from the parts the trainer actually computes.
    harness::TrainConfig cfg;
    cfg.data_dir = tiny_dataset(ctx).string();
    cfg.checkpoint_dir = (ctx.work / "unused").string();
    harness::Trainer tr(cfg, harness::ClipSet::load(cfg.data_dir, data::Split::Train, cfg.j));
    double worst_total = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto r = tr.step();
        const auto& w = cfg.weights;
        const double manual = r.l_vgg + w.alpha * r.l_lip + w.beta * r.l_freq + w.gamma * r.l_adv_g;
        worst_total = std::max(worst_total, std::abs(r.total - manual));
    }
    o.require(worst_total <= 1e-12, "total vs parts " + fmt("%.3g", worst_total));
    if (o.pass)
        o.detail = "8 losses exactly 0, parseval tie " + fmt("%.2g", worst) + ", recomposition " + fmt("%.2g", worst_total);
    return o;
}

// 4 ------------------------------------------------------------------------

Tensor constant_rgb(std::size_t h, std::size_t w, double v) {
    Tensor t({3, h, w});
    t.fill(v);
    return t;
}

/// Grey image with a bright square, shifted right by dx pixels.
Tensor square_rgb(std::size_t n, std::size_t dx) {
    Tensor t({3, n, n});
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x)
                t[(c * n + y) * n + x] = (y >= 20 && y < 44 && x >= 20 + dx && x < 44 + dx) ? 0.8 : 0.2;
    return t;
}

Outcome metric_identities() {
    Outcome o;
    Rng rng(44);
    const Tensor a = core::uniform_tensor({3, 32, 40}, rng, 0.0, 1.0);
    o.require(metrics::ssim_y(a, a) == 1.0, "ssim_y(a,a) = " + fmt("%.17g", metrics::ssim_y(a, a)));
    o.require(metrics::erqa_y(a, a) == 1.0, "erqa_y(a,a) = " + fmt("%.17g", metrics::erqa_y(a, a)));
    o.require(metrics::psnr_y(a, a) == metrics::kPsnrIdentical, "psnr_y(a,a) is not the sentinel");
    const double offset = metrics::psnr_y(constant_rgb(16, 16, 0.2), constant_rgb(16, 16, 0.7));
    o.require(std::abs(offset - 10.0 * std::log10(4.0)) <= 1e-9, "0.5-offset psnr " + fmt("%.17g", offset));
    const double shifted = metrics::erqa_y(square_rgb(64, 0), square_rgb(64, 1));
    o.require(shifted == 1.0, "1-pixel-shift erqa " + fmt("%.17g", shifted));
    if (o.pass) o.detail = "0.5-offset psnr " + fmt("%.12f", offset) + " dB";
    return o;
}

// 5 ------------------------------------------------------------------------

fs::path full_dataset(const Context& ctx) {
    const fs::path root = ctx.work / "data32";
    if (!fs::exists(root / "splits.csv")) {
        fs::remove_all(root);
        if (run_vfh(ctx, "gen-data --seed 1 --clips 32 --val 4 --test 4 --frames 24 --out " + quote(root.string()),
                    ctx.work / "gen-data.log") != 0)
            throw std::runtime_error("vfh gen-data failed, see " + (ctx.work / "gen-data.log").string());
    }
    return root;
}

Outcome beats_bicubic(const Context& ctx) {
    Outcome o;
    const fs::path data = full_dataset(ctx);
    std::string summary;
    for (int seed = 1; seed <= 3; ++seed) {
        const fs::path dir = ctx.work / ("train_seed" + std::to_string(seed));
        fs::remove_all(dir);
        const fs::path cfg = ctx.work / ("train_seed" + std::to_string(seed) + ".cfg");
        write_file(cfg, "seed=" + std::to_string(seed) + "\nsteps=2000\ndata_dir=" + data.string() +
                            "\ncheckpoint_dir=" + dir.string() + "\n");
        const fs::path log = ctx.work / ("train_seed" + std::to_string(seed) + ".log");
        fs::remove(log);
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = run_vfh(ctx, "train --config " + quote(cfg.string()) + " --log-every 500", log);
        const double secs = seconds_since(t0);
        const std::string tag = "seed " + std::to_string(seed);
        o.require(rc == 0, tag + ": vfh train exited " + std::to_string(rc));
        o.require(secs < 1800.0, tag + ": training took " + fmt("%.0f", secs) + " s");
        if (rc != 0) continue;
        const fs::path csv = dir / "test.csv";
        if (run_vfh(ctx, "eval --ckpt " + quote((dir / "final.ckpt").string()) + " --split test --out " + quote(csv.string()),
                    log) != 0) {
            o.require(false, tag + ": vfh eval failed");
            continue;
        }
        const auto rows = csv_rows(csv);
        const auto it = rows.find("mean");
        if (it == rows.end() || it->second.size() < 6) {
            o.require(false, tag + ": no mean row in " + csv.string());
            continue;
        }
        const auto& m = it->second;  // psnr, ssim, erqa, then the bicubic triple
        o.require(m[0] > m[3], tag + ": psnr " + fmt("%.4f", m[0]) + " <= bicubic " + fmt("%.4f", m[3]));
        o.require(m[1] > m[4], tag + ": ssim " + fmt("%.5f", m[1]) + " <= bicubic " + fmt("%.5f", m[4]));
        o.require(m[2] > m[5], tag + ": erqa " + fmt("%.4f", m[2]) + " <= bicubic " + fmt("%.4f", m[5]));
        summary += (summary.empty() ? "" : "; ") + tag + " psnr " + fmt("%.2f", m[0]) + "/" + fmt("%.2f", m[3]) + " ssim " +
                   fmt("%.4f", m[1]) + "/" + fmt("%.4f", m[4]) + " erqa " + fmt("%.3f", m[2]) + "/" + fmt("%.3f", m[5]) +
                   " in " + fmt("%.0f", secs) + " s";
    }
    o.detail = (o.pass ? "" : o.detail + " | ") + "model/bicubic " + summary;
    return o;
}

// 6 ------------------------------------------------------------------------

Outcome ablation_directions(const Context& ctx) {
    Outcome o;
    const fs::path data = full_dataset(ctx);
    const fs::path dir = ctx.work / "ablate";
    fs::remove_all(dir);
    const fs::path cfg = ctx.work / "ablate.cfg";
    write_file(cfg, "seed=1\nsteps=500\ndata_dir=" + data.string() + "\ncheckpoint_dir=" + dir.string() +
                        "\narms=no_audio,audio,audio_attention,beta0,alpha0\n");
    const fs::path log = ctx.work / "ablate.log";
    fs::remove(log);
    const int rc = run_vfh(ctx, "ablate --config " + quote(cfg.string()), log);
    o.require(rc == 0, "vfh ablate exited " + std::to_string(rc));
    if (rc != 0) return o;

    const auto rows = csv_rows(dir / "ablation.csv");
    for (const char* arm : {"no_audio", "audio", "audio_attention", "beta0", "alpha0"})
        o.require(rows.count(arm) == 1, std::string("no row for ") + arm);
    if (!o.pass) return o;
    // Columns after the arm: psnr, ssim, erqa, bicubic x3, freq_mse, lip_loss, linf_vs_no_audio.
    const auto& full = rows.at("audio_attention");
    const double freq = full[6], freq_b0 = rows.at("beta0")[6];
    const double lipl = full[7], lip_a0 = rows.at("alpha0")[7];
    const double linf = full[8];
    o.require(freq < freq_b0, "freq_mse beta>0 " + fmt("%.6g", freq) + " not below beta=0 " + fmt("%.6g", freq_b0));
    o.require(lipl < lip_a0, "lip loss alpha>0 " + fmt("%.6g", lipl) + " not below alpha=0 " + fmt("%.6g", lip_a0));
    o.require(linf > 0.0, "audio_attention output equals no_audio output");
    o.detail = (o.pass ? "" : o.detail + " | ") + "freq_mse " + fmt("%.4g", freq) + " vs " + fmt("%.4g", freq_b0) +
               ", lip " + fmt("%.5g", lipl) + " vs " + fmt("%.5g", lip_a0) + ", linf " + fmt("%.3g", linf) +
               "; psnr no_audio/audio/audio_attention " + fmt("%.3f", rows.at("no_audio")[0]) + "/" +
               fmt("%.3f", rows.at("audio")[0]) + "/" + fmt("%.3f", full[0]) + " (ordering not asserted)";
    return o;
}

// 7 ------------------------------------------------------------------------

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

Outcome determinism(const Context& ctx) {
    Outcome o;
    const fs::path data = tiny_dataset(ctx);
    const fs::path dir = ctx.work / "determinism", first = ctx.work / "determinism_first";
    const fs::path cfg = ctx.work / "determinism.cfg";
    write_file(cfg, "seed=5\nsteps=20\ncheckpoint_every=10\ndata_dir=" + data.string() + "\ncheckpoint_dir=" +
                        dir.string() + "\n");
    fs::remove_all(dir);
    fs::remove_all(first);
    const fs::path log = ctx.work / "determinism.log";
    fs::remove(log);
    o.require(run_vfh(ctx, "train --config " + quote(cfg.string()) + " --log-every 0", log) == 0, "first run failed");
    if (!o.pass) return o;
    fs::rename(dir, first);
    o.require(run_vfh(ctx, "train --config " + quote(cfg.string()) + " --log-every 0", log) == 0, "second run failed");
    if (!o.pass) return o;

    const auto a = tree_contents(first), b = tree_contents(dir);
    std::set<std::string> names;
    for (const auto& [k, _] : a) names.insert(k);
    for (const auto& [k, _] : b) names.insert(k);
    for (const auto& n : names) {
        const auto ia = a.find(n), ib = b.find(n);
        if (ia == a.end() || ib == b.end())
            o.require(false, n + " written by one run only");
        else
            o.require(ia->second == ib->second, n + " differs");
    }
    o.require(a.count("final.ckpt") && a.count("loss.csv"), "expected final.ckpt and loss.csv");
    if (o.pass) o.detail = std::to_string(names.size()) + " files identical";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-7"};
    Context ctx;
    std::string work = "acceptance_work";
    std::vector<int> only;
    app.add_option("--vfh", ctx.vfh, "Path to the vfh binary")->required()->check(CLI::ExistingFile);
    app.add_option("--work", work, "Scratch directory")->capture_default_str();
    app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 7));
    CLI11_PARSE(app, argc, argv);
    ctx.vfh = fs::absolute(ctx.vfh).string();
    ctx.work = fs::absolute(work);
    fs::create_directories(ctx.work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient suite", [&] { return gradient_suite(ctx); }},
        {"dft oracle", [] { return dft_oracle(); }},
        {"loss identities", [&] { return loss_identities(ctx); }},
        {"metric identities", [] { return metric_identities(); }},
        {"trained model beats bicubic", [&] { return beats_bicubic(ctx); }},
        {"ablation directions", [&] { return ablation_directions(ctx); }},
        {"determinism", [&] { return determinism(ctx); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %d %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
