// acdc: online cross-domain adaptation over paired sample streams.
//
// Subcommands:
//   run        prequential test-then-train experiment from two manifests
//   synth      generate a synthetic two-domain benchmark with drift
//   gradcheck  run the numeric verification suites
//   report     aggregate metrics traces into mean +/- std tables
//
// Exit codes: 0 success, 1 usage, 2 runtime error, 3 verification failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acdc/config.hpp"
#include "acdc/drift.hpp"
#include "acdc/gradcheck.hpp"
#include "acdc/io.hpp"
#include "acdc/stream.hpp"

namespace fs = std::filesystem;
using namespace acdc;

namespace {

int cmd_run(const RunConfig& cfg) {
    if (cfg.source_manifest.empty() || cfg.target_manifest.empty()) {
        std::cerr << "run: source and target manifests are required\n";
        return 1;
    }
    const DatasetManifest src_m = read_manifest(cfg.source_manifest);
    const DatasetManifest tgt_m = read_manifest(cfg.target_manifest);
    if (src_m.role != "source" || tgt_m.role != "target")
        throw std::runtime_error("run: manifest roles do not match their positions");
    if (src_m.feature_dim != tgt_m.feature_dim)
        throw std::runtime_error("run: feature dimensions differ between streams");
    if (src_m.class_count != tgt_m.class_count)
        throw std::runtime_error("run: class counts differ between streams");

    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);

    RunConfig echoed = cfg;
    echoed.source_manifest = fs::absolute(cfg.source_manifest).string();
    echoed.target_manifest = fs::absolute(cfg.target_manifest).string();
    write_config(echoed, (out / "config.txt").string());
    write_manifest(src_m, (out / "source.manifest.json").string());
    write_manifest(tgt_m, (out / "target.manifest.json").string());

    AcdcModel model =
        init_model(src_m.feature_dim, src_m.class_count, cfg.flags(), cfg.seed_model, cfg.hyper());

    RunState resume_state;
    bool resuming = false;
    if (!cfg.resume_from.empty()) {
        resuming = load_checkpoint(cfg.resume_from, model, &resume_state);
        if (!resuming) throw std::runtime_error("run: checkpoint has no protocol state to resume");
    }

    auto src = open_stream(src_m);
    auto tgt = open_stream(tgt_m);

    RunParams params;
    params.window_size = cfg.window_size;
    params.epochs = cfg.epochs;
    params.seed_stream = cfg.seed_stream;
    params.total_source = src_m.sample_count;
    params.total_target = tgt_m.sample_count;
    params.checkpoint_every = cfg.checkpoint_every;
    params.checkpoint_path = (out / "checkpoint.bin").string();

    MetricsTrace trace;
    const auto t0 = std::chrono::steady_clock::now();
    prequential_run(model, *src, *tgt, params, trace, {}, resuming ? &resume_state : nullptr);
    const double total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    write_metrics(trace, (out / "metrics.csv").string());
    write_timings(trace, (out / "timings.csv").string());
    save_checkpoint(model, (out / "checkpoint.bin").string());

    std::ostringstream summary;
    const WindowRow* last = trace.rows.empty() ? nullptr : &trace.rows.back();
    summary << "windows processed: " << trace.rows.size() << "\n"
            << "final cumulative target accuracy: "
            << (last ? std::to_string(last->target_acc_cum) : "n/a") << "\n"
            << "final cumulative source accuracy: "
            << (last ? std::to_string(last->source_acc_cum) : "n/a") << "\n"
            << "final widths (dae/daa/disc): " << model.dae_width() << "/" << model.daa_width()
            << "/" << model.disc_width() << "\n"
            << "window size: " << cfg.window_size << ", epochs per window: " << cfg.epochs << "\n"
            << "ablations: daa=" << (cfg.ablate_daa ? "off" : "on")
            << " evolution=" << (cfg.fixed_structure ? "off" : "on")
            << " dae_single_node=" << (cfg.dae_single_node ? "yes" : "no")
            << " daa_disc_signal=" << (cfg.no_daa_disc_signal ? "off" : "on") << "\n"
            << "total wall time: " << total_ms << " ms\n";
    std::ofstream((out / "summary.txt").string()) << summary.str();
    std::cout << summary.str();
    return 0;
}

int cmd_synth(const std::string& out_dir, SynthSpec spec, std::size_t z_source,
              std::size_t z_target, const std::string& format) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    auto [source, target] = synth_streams(spec);

    const DriftSchedule sched_s = make_schedule(spec.u, z_source, source.size(), spec.seed + 101);
    const DriftSchedule sched_t = make_schedule(spec.u, z_target, target.size(), spec.seed + 202);
    for (std::size_t i = 0; i < source.size(); ++i)
        source[i].features = apply_drift(source[i].features, sched_s, i);
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i].features = apply_drift(target[i].features, sched_t, i);

    const std::string ext = format == "bin" ? ".bin" : ".csv";
    const std::string src_file = (out / ("source" + ext)).string();
    const std::string tgt_file = (out / ("target" + ext)).string();
    if (format == "bin") {
        write_stream_bin(source, src_file, true);
        write_stream_bin(target, tgt_file, true);
    } else {
        write_stream_csv(source, src_file, true);
        write_stream_csv(target, tgt_file, true);
    }

    DatasetManifest sm{"synthetic-source", spec.u,  spec.m, "source", "source" + ext,
                       format,             true,    false,  source.size()};
    DatasetManifest tm{"synthetic-target", spec.u,  spec.m, "target", "target" + ext,
                       format,             true,    true,   target.size()};
    write_manifest(sm, (out / "source.manifest.json").string());
    write_manifest(tm, (out / "target.manifest.json").string());
    write_schedule(sched_s, (out / "source.schedule.json").string());
    write_schedule(sched_t, (out / "target.schedule.json").string());

    std::cout << "wrote " << source.size() << " source / " << target.size()
              << " target samples under " << out_dir << "\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    const auto results = run_verification_suite(seed);
    bool all_pass = true;
    for (const CheckResult& r : results) {
        std::printf("[%s] %-38s worst err %.3g %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.metric, r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 3;
}

int cmd_report(const std::vector<std::string>& traces) {
    if (traces.empty()) {
        std::cerr << "report: no input traces\n";
        return 1;
    }
    struct Agg {
        std::vector<double> target, source;
    };
    std::map<std::string, Agg> groups;
    for (const std::string& path : traces) {
        const MetricsTrace t = read_metrics(path);
        if (t.rows.empty()) throw std::runtime_error("report: empty trace: " + path);
        const std::string group = fs::absolute(path).parent_path().filename().string();
        groups[group].target.push_back(t.rows.back().target_acc_cum);
        groups[group].source.push_back(t.rows.back().source_acc_cum);
    }
    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        return std::pair<double, double>(mean, std::sqrt(var));
    };
    std::printf("%-28s %5s  %-22s %-22s\n", "experiment", "runs", "target acc (mean+/-std)",
                "source acc (mean+/-std)");
    for (const auto& [name, agg] : groups) {
        const auto [tm, ts] = mean_std(agg.target);
        const auto [sm, ss] = mean_std(agg.source);
        std::printf("%-28s %5zu  %7.4f +/- %-10.4f %7.4f +/- %-10.4f\n", name.c_str(),
                    agg.target.size(), tm, ts, sm, ss);
    }
    return 0;
}

// Pull --config out of argv before CLI11 runs so file values become the
// defaults the remaining flags override.
std::string prescan_config(int argc, char** argv) {
    for (int i = 1; i < argc - 1; ++i)
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online cross-domain stream adaptation engine"};
    app.require_subcommand(1);

    RunConfig cfg;
    const std::string config_file = prescan_config(argc, argv);
    try {
        if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    auto* run = app.add_subcommand("run", "run a prequential experiment");
    std::string config_dummy;
    run->add_option("--config", config_dummy, "key=value config file (flags override it)");
    run->add_option("--source", cfg.source_manifest, "source stream manifest");
    run->add_option("--target", cfg.target_manifest, "target stream manifest");
    run->add_option("--out", cfg.out_dir, "output directory");
    run->add_option("--window-size", cfg.window_size, "samples per sliding window");
    run->add_option("--epochs", cfg.epochs, "internal epochs per window");
    run->add_option("--learning-rate", cfg.learning_rate, "sgd learning rate");
    run->add_option("--momentum", cfg.momentum, "sgd momentum");
    run->add_option("--spc-a1", cfg.spc_a1, "spc threshold scale");
    run->add_option("--spc-a2", cfg.spc_a2, "spc threshold offset");
    run->add_option("--noise", cfg.noise_fraction, "masking noise fraction");
    run->add_option("--seed-model", cfg.seed_model, "model init/growth seed");
    run->add_option("--seed-stream", cfg.seed_stream, "interleave/pairing seed");
    run->add_flag("--ablate-daa", cfg.ablate_daa, "disable the adversarial module");
    run->add_flag("--fixed-structure", cfg.fixed_structure, "disable width evolution");
    run->add_flag("--dae-single-node", cfg.dae_single_node, "start the autoencoder at one node");
    run->add_flag("--no-daa-disc-signal", cfg.no_daa_disc_signal,
                  "daa growth does not force disc growth");
    run->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "write a resumable checkpoint every N windows");
    run->add_option("--resume", cfg.resume_from, "resume from a mid-run checkpoint");

    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
    SynthSpec spec;
    std::string synth_out = "synth-out";
    std::size_t z_source = 5, z_target = 7;
    std::string format = "csv";
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--u", spec.u, "feature dimension");
    synth->add_option("--m", spec.m, "class count");
    synth->add_option("--n-source", spec.n_source, "source stream length");
    synth->add_option("--n-target", spec.n_target, "target stream length");
    synth->add_option("--class-sep", spec.class_sep, "class mean separation scale");
    synth->add_option("--noise-std", spec.noise_std, "within-class standard deviation");
    synth->add_option("--shift-angle", spec.shift_angle, "target rotation (radians)");
    synth->add_option("--shift-offset", spec.shift_offset, "target translation per coordinate");
    synth->add_option("--z-source", z_source, "source concept count (1 = no drift)");
    synth->add_option("--z-target", z_target, "target concept count (1 = no drift)");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--format", format, "csv or bin")
        ->check(CLI::IsMember({"csv", "bin"}));

    auto* gradcheck = app.add_subcommand("gradcheck", "run the verification suites");
    std::uint64_t gc_seed = 42;
    gradcheck->add_option("--seed", gc_seed, "suite seed");

    auto* report = app.add_subcommand("report", "aggregate metrics traces");
    std::vector<std::string> trace_paths;
    report->add_option("traces", trace_paths, "metrics.csv files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(cfg);
        if (synth->parsed()) return cmd_synth(synth_out, spec, z_source, z_target, format);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed);
        if (report->parsed()) return cmd_report(trace_paths);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
