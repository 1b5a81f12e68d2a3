// vfh: data generation, training, evaluation, ablation and gradient checks.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "vfh/data/dataset.hpp"
#include "vfh/harness/ablate.hpp"
#include "vfh/harness/evaluate.hpp"
#include "vfh/harness/gradcheck.hpp"
#include "vfh/harness/trainer.hpp"

using namespace vfh;

namespace {

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(const std::string& msg) {
    std::cerr << "error: " << one_line(msg) << std::endl;
    return 1;
}

struct GenDataArgs {
    std::uint64_t seed = 1;
    std::size_t clips = 32, val = 4, test = 4, frames = 24;
    std::string out;
};

struct TrainArgs {
    std::string config, resume;
    std::uint64_t log_every = 100;
};

struct EvalArgs {
    std::string ckpt, split = "test", out, config, data;
    bool gt_vs_gt = false;
};

struct AblateArgs {
    std::string config, out;
};

int run_gen_data(const GenDataArgs& a) {
    data::DatasetSpec spec;
    spec.seed = a.seed;
    spec.train = a.clips;
    spec.val = a.val;
    spec.test = a.test;
    spec.frames = a.frames;
    if (spec.train + spec.val + spec.test == 0) throw std::invalid_argument("gen-data: no clips requested");
    data::generate_clip(spec.seed, spec.frames);  // validates the frame count before writing anything
    data::generate_dataset(a.out, spec);
    std::cout << "wrote " << spec.train << " train, " << spec.val << " val, " << spec.test << " test clips of " << spec.frames
              << " frames to " << a.out << "\n";
    return 0;
}

int run_train(const TrainArgs& a) {
    const harness::TrainConfig cfg = harness::TrainConfig::load(a.config);
    const auto result = harness::train(cfg, a.resume, [&](const losses::LossReport& r) {
        if (a.log_every && (r.step + 1) % a.log_every == 0) {
            std::printf("step %llu/%llu total=%.6g vgg=%.6g lip=%.6g freq=%.6g adv_g=%.6g adv_d=%.6g\n",
                        static_cast<unsigned long long>(r.step + 1), static_cast<unsigned long long>(cfg.steps), r.total,
                        r.l_vgg, r.l_lip, r.l_freq, r.l_adv_g, r.l_adv_d);
            std::fflush(stdout);
        }
    });
    std::cout << "checkpoint " << result.final_checkpoint.string() << "\nloss csv " << result.loss_csv.string() << "\n";
    return 0;
}

int run_eval(const EvalArgs& a) {
    harness::TrainConfig override_cfg;
    if (!a.config.empty()) override_cfg = harness::TrainConfig::load(a.config);
    harness::LoadedModel lm = harness::load_model(a.ckpt, a.config.empty() ? nullptr : &override_cfg);
    const std::string root = a.data.empty() ? lm.cfg.data_dir : a.data;
    const auto set = harness::ClipSet::load(root, data::parse_split(a.split), lm.cfg.j);
    const auto r = harness::evaluate(*lm.models, lm.cfg, set, false, a.gt_vs_gt);
    harness::write_text(a.out, harness::eval_csv(r, lm.cfg));
    std::printf("frames %zu\nmodel   psnr_y=%s ssim_y=%.6f erqa=%.6f\nbicubic psnr_y=%s ssim_y=%.6f erqa=%.6f\n",
                r.model_rows.size(), metrics::format_metric(r.model.psnr_db).c_str(), r.model.ssim, r.model.erqa,
                metrics::format_metric(r.bicubic.psnr_db).c_str(), r.bicubic.ssim, r.bicubic.erqa);
    return 0;
}

int run_ablate(const AblateArgs& a) {
    const harness::TrainConfig cfg = harness::TrainConfig::load(a.config);
    const auto arms = harness::ablate(cfg, [](const std::string& msg) { std::cout << msg << std::endl; });
    const std::string out = a.out.empty() ? (std::filesystem::path(cfg.checkpoint_dir) / "ablation.csv").string() : a.out;
    const std::string csv = harness::ablation_csv(arms, cfg);
    harness::write_text(out, csv);
    std::cout << csv.substr(harness::config_comment(cfg).size()) << "report " << out << "\n";
    return 0;
}

int run_gradcheck(bool negative_control) {
    auto entries = harness::gradcheck_registry();
    if (negative_control) entries.push_back(harness::negative_control_entry());
    std::size_t passed = 0;
    const auto lines = harness::run_gradchecks(entries, [&](const harness::GradCheckLine& l) {
        std::cout << harness::format_gradcheck_line(l) << std::endl;
        passed += l.pass;
    });
    std::cout << "gradcheck " << passed << "/" << lines.size() << " passed (tolerance " << harness::kGradTolerance << ")\n";
    return passed == lines.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vfh: audio-visual face hallucination toolkit"};
    app.require_subcommand(1);

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "Generate the synthetic talking-face dataset");
    gen->add_option("--seed", gd.seed, "First clip seed")->capture_default_str();
    gen->add_option("--clips", gd.clips, "Training clips")->capture_default_str();
    gen->add_option("--val", gd.val, "Validation clips")->capture_default_str();
    gen->add_option("--test", gd.test, "Test clips")->capture_default_str();
    gen->add_option("--frames", gd.frames, "Frames per clip")->capture_default_str();
    gen->add_option("--out", gd.out, "Output directory")->required();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train from a config file");
    tr->add_option("--config", ta.config, "Config file (key=value)")->required()->check(CLI::ExistingFile);
    tr->add_option("--resume", ta.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
    tr->add_option("--log-every", ta.log_every, "Print losses every N steps (0: never)")->capture_default_str();

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Score a checkpoint and the bicubic baseline on a split");
    ev->add_option("--ckpt", ea.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    ev->add_option("--split", ea.split, "train, val or test")->capture_default_str();
    ev->add_option("--out", ea.out, "Output CSV")->required();
    ev->add_option("--config", ea.config, "Build the model from this config instead of the checkpoint's")
        ->check(CLI::ExistingFile);
    ev->add_option("--data", ea.data, "Dataset directory (default: the config's data_dir)");
    ev->add_flag("--gt-vs-gt", ea.gt_vs_gt, "Score ground truth against itself in the model columns");

    AblateArgs aa;
    auto* ab = app.add_subcommand("ablate", "Train and compare the configured arms");
    ab->add_option("--config", aa.config, "Config file (key=value)")->required()->check(CLI::ExistingFile);
    ab->add_option("--out", aa.out, "Report CSV (default: <checkpoint_dir>/ablation.csv)");

    bool negative_control = false;
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every layer and loss");
    gc->add_flag("--negative-control", negative_control, "Also run a deliberately broken layer");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(e.what());
    }

    try {
        if (*gen) return run_gen_data(gd);
        if (*tr) return run_train(ta);
        if (*ev) return run_eval(ea);
        if (*ab) return run_ablate(aa);
        if (*gc) return run_gradcheck(negative_control);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return fail("no command");
}
