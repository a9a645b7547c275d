#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "amnet/batch.hpp"
#include "amnet/bench.hpp"
#include "amnet/checkpoint.hpp"
#include "amnet/config.hpp"
#include "amnet/manifest.hpp"
#include "amnet/parallel.hpp"
#include "amnet/synth.hpp"
#include "amnet/train.hpp"

namespace amnet::cli {

namespace {

struct ModelFlags {
    std::string preset = "default";
    int stem = 0;       // 0 = keep preset value
    int head = 0;
    int kernel = 0;
    std::string bottlenecks;  // "t,c,n,s;..." override
    std::string loss = "am_softmax";
    double scale_s = 30.0;
    double margin_m = 0.5;
    double loss_eps = 1e-11;
};

struct DataFlags {
    std::string manifest;
    double window_ms = 200.0;
    double hop_ms = 10.0;
    bool no_normalize = false;
    bool trim = false;
    double trim_ratio = 0.05;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--preset", mf.preset, "Architecture preset: default, desk or toy")
        ->capture_default_str();
    cmd->add_option("--stem", mf.stem, "Override stem channels (0 keeps the preset)")->capture_default_str();
    cmd->add_option("--head", mf.head, "Override head channels (0 keeps the preset)")->capture_default_str();
    cmd->add_option("--kernel", mf.kernel, "Override depthwise kernel size (0 keeps the preset)")
        ->capture_default_str();
    cmd->add_option("--bottlenecks", mf.bottlenecks,
                    "Override the stage table, e.g. '1,16,1,1;6,24,2,2' (t,c,n,s per stage)");
    cmd->add_option("--loss", mf.loss, "Classifier loss: softmax or am_softmax")->capture_default_str();
    cmd->add_option("--scale-s,--s", mf.scale_s, "Cosine logit scale for am_softmax")->capture_default_str();
    cmd->add_option("--margin-m,--m", mf.margin_m, "Additive margin for am_softmax")->capture_default_str();
    cmd->add_option("--loss-eps", mf.loss_eps, "Epsilon inside the loss norm denominators")
        ->capture_default_str();
}

void add_data_flags(CLI::App* cmd, DataFlags& df) {
    cmd->add_option("--manifest", df.manifest, "Dataset manifest CSV (path,speaker,split)")->required();
    cmd->add_option("--window-ms", df.window_ms, "Frame window in milliseconds")->capture_default_str();
    cmd->add_option("--hop-ms", df.hop_ms, "Frame hop in milliseconds")->capture_default_str();
    cmd->add_flag("--no-normalize", df.no_normalize, "Skip per-utterance max-abs amplitude normalization");
    cmd->add_flag("--trim", df.trim, "Strip low-energy leading/trailing audio before framing");
    cmd->add_option("--trim-ratio", df.trim_ratio, "RMS threshold ratio used by --trim")->capture_default_str();
}

ModelConfig resolve_model_config(const ModelFlags& mf) {
    ModelConfig cfg = preset_config(mf.preset);
    if (mf.stem > 0) cfg.stem_channels = mf.stem;
    if (mf.head > 0) cfg.head_channels = mf.head;
    if (mf.kernel > 0) cfg.kernel_size = mf.kernel;
    if (!mf.bottlenecks.empty()) cfg.bottlenecks = parse_bottlenecks(mf.bottlenecks);
    cfg.loss = loss_kind_from_name(mf.loss);
    cfg.scale_s = mf.scale_s;
    cfg.margin_m = mf.margin_m;
    cfg.loss_eps = mf.loss_eps;
    return cfg;
}

DatasetOptions resolve_dataset_options(const DataFlags& df) {
    DatasetOptions opt;
    opt.window_ms = df.window_ms;
    opt.hop_ms = df.hop_ms;
    opt.normalize = !df.no_normalize;
    opt.trim = df.trim;
    opt.trim_ratio = df.trim_ratio;
    return opt;
}

nlohmann::json resolved_config_json(const ModelConfig& cfg, const TrainConfig& tc, const DataFlags& df,
                                    int threads) {
    return nlohmann::json{
        {"model",
         {{"preset_resolved", true},
          {"stem_channels", cfg.stem_channels},
          {"bottlenecks", format_bottlenecks(cfg.bottlenecks)},
          {"head_channels", cfg.head_channels},
          {"kernel_size", cfg.kernel_size},
          {"num_classes", cfg.num_classes},
          {"window_samples", cfg.window_samples},
          {"loss", loss_kind_name(cfg.loss)},
          {"scale_s", cfg.scale_s},
          {"margin_m", cfg.margin_m},
          {"loss_eps", cfg.loss_eps},
          {"bn_momentum", cfg.bn_momentum},
          {"bn_eps", cfg.bn_eps}}},
        {"train",
         {{"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"lr", tc.optimizer.lr},
          {"alpha", tc.optimizer.alpha},
          {"eps", tc.optimizer.eps},
          {"seed", tc.seed},
          {"eval_every", tc.eval_every}}},
        {"data",
         {{"manifest", df.manifest},
          {"window_ms", df.window_ms},
          {"hop_ms", df.hop_ms},
          {"normalize", !df.no_normalize},
          {"trim", df.trim},
          {"trim_ratio", df.trim_ratio}}},
        {"threads", threads},
    };
}

struct TrainOutcome {
    TrainResult result;
    EvalReport final_eval;
    bool has_eval = false;
};

TrainOutcome run_training(const ModelFlags& mf, const DataFlags& df, TrainConfig tc,
                          const std::filesystem::path& out_dir, double margin_override, bool dump_config,
                          int threads) {
    const Manifest manifest = load_manifest(df.manifest);
    DatasetOptions opt = resolve_dataset_options(df);
    tc.window_ms = df.window_ms;
    tc.hop_ms = df.hop_ms;

    const FrameDataset train_set = build_frame_dataset(manifest, Split::train, opt);
    const FrameDataset test_set = build_frame_dataset(manifest, Split::test, opt);
    if (train_set.size() == 0) throw ValueError("train split produced zero frames");

    ModelFlags mf_local = mf;
    if (margin_override >= 0.0) mf_local.margin_m = margin_override;
    ModelConfig cfg = resolve_model_config(mf_local);
    cfg.num_classes = manifest.num_classes();
    cfg.window_samples = static_cast<int>(train_set.window);
    cfg.validate();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create run directory '" + out_dir.string() + "': " + ec.message());
    const nlohmann::json resolved = resolved_config_json(cfg, tc, df, threads);
    {
        std::ofstream f(out_dir / "resolved_config.json");
        f << resolved.dump(2) << "\n";
    }
    if (dump_config) std::cout << resolved.dump(2) << "\n";

    Model model = build_mobilenet1d(cfg, tc.seed);
    TrainOutcome outcome;
    outcome.result = train(model, train_set, test_set, manifest.speakers, tc, out_dir);
    if (test_set.size() > 0) {
        outcome.final_eval = evaluate(model, test_set, {tc.batch_size});
        outcome.has_eval = true;
    }
    return outcome;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"1-D MobileNet speaker identification over raw waveforms"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a reproducible synthetic speaker corpus");
    int sy_speakers = 10, sy_utterances = 10, sy_rate = 16000;
    double sy_seconds = 2.0;
    std::uint64_t sy_seed = 1234;
    std::string sy_out;
    synth->add_option("--speakers", sy_speakers, "Number of speakers")->capture_default_str();
    synth->add_option("--utterances", sy_utterances, "Utterances per speaker")->capture_default_str();
    synth->add_option("--seconds", sy_seconds, "Utterance length in seconds")->capture_default_str();
    synth->add_option("--rate", sy_rate, "Sample rate in Hz")->capture_default_str();
    synth->add_option("--seed", sy_seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", sy_out, "Output directory")->required();

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Train a model on a manifest");
    ModelFlags tr_model;
    DataFlags tr_data;
    TrainConfig tr_cfg;
    std::string tr_out;
    bool tr_dump_config = false;
    int tr_threads = 1;
    add_data_flags(train_cmd, tr_data);
    add_model_flags(train_cmd, tr_model);
    train_cmd->add_option("--out", tr_out, "Run directory")->required();
    train_cmd->add_option("--epochs", tr_cfg.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--batch-size", tr_cfg.batch_size, "Mini-batch size")->capture_default_str();
    train_cmd->add_option("--lr", tr_cfg.optimizer.lr, "RMSprop learning rate")->capture_default_str();
    train_cmd->add_option("--alpha", tr_cfg.optimizer.alpha, "RMSprop smoothing constant")
        ->capture_default_str();
    train_cmd->add_option("--eps", tr_cfg.optimizer.eps, "RMSprop epsilon")->capture_default_str();
    train_cmd->add_option("--seed", tr_cfg.seed, "Seed for init and shuffling")->capture_default_str();
    train_cmd->add_option("--eval-every", tr_cfg.eval_every, "Evaluate the test split every N epochs")
        ->capture_default_str();
    train_cmd->add_option("--threads", tr_threads, "Worker threads (results are identical for any value)")
        ->capture_default_str();
    train_cmd->add_flag("--dump-config", tr_dump_config, "Also print the resolved configuration to stdout");

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest split");
    std::string ev_checkpoint, ev_split = "test", ev_out;
    DataFlags ev_data;
    int ev_batch = 128, ev_threads = 1;
    eval_cmd->add_option("--checkpoint", ev_checkpoint, "Checkpoint file")->required();
    add_data_flags(eval_cmd, ev_data);
    eval_cmd->add_option("--split", ev_split, "Manifest split to score: train or test")->capture_default_str();
    eval_cmd->add_option("--batch-size", ev_batch, "Mini-batch size")->capture_default_str();
    eval_cmd->add_option("--out", ev_out, "Also write the report JSON here");
    eval_cmd->add_option("--threads", ev_threads, "Worker threads")->capture_default_str();

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "Measure inference latency");
    std::string be_checkpoint, be_out;
    ModelFlags be_model;
    int be_batches = 6561, be_batch_size = 128, be_warmup = 10, be_classes = 462, be_threads = 1;
    std::int64_t be_window = 3200;
    std::uint64_t be_seed = 1234;
    bench_cmd->add_option("--checkpoint", be_checkpoint, "Checkpoint to benchmark (otherwise a fresh preset model)");
    add_model_flags(bench_cmd, be_model);
    bench_cmd->add_option("--classes", be_classes, "Class count for a fresh preset model")->capture_default_str();
    bench_cmd->add_option("--batches", be_batches, "Timed batches")->capture_default_str();
    bench_cmd->add_option("--batch-size", be_batch_size, "Frames per batch")->capture_default_str();
    bench_cmd->add_option("--window-samples", be_window, "Frame length in samples")->capture_default_str();
    bench_cmd->add_option("--warmup", be_warmup, "Untimed warmup batches")->capture_default_str();
    bench_cmd->add_option("--seed", be_seed, "Seed for the generated frames")->capture_default_str();
    bench_cmd->add_option("--threads", be_threads, "Worker threads")->capture_default_str();
    bench_cmd->add_option("--out", be_out, "Also write the report JSON here");

    // --- info ---
    auto* info_cmd = app.add_subcommand("info", "Report checkpoint parameters and size");
    std::string in_checkpoint;
    info_cmd->add_option("--checkpoint", in_checkpoint, "Checkpoint file")->required();

    // --- sweep-margin ---
    auto* sweep_cmd = app.add_subcommand("sweep-margin", "Train once per margin value and compare");
    ModelFlags sw_model;
    DataFlags sw_data;
    TrainConfig sw_cfg;
    std::string sw_out, sw_values = "0.35,0.5,0.8";
    int sw_threads = 1;
    add_data_flags(sweep_cmd, sw_data);
    add_model_flags(sweep_cmd, sw_model);
    sweep_cmd->add_option("--out", sw_out, "Parent directory for the per-margin runs")->required();
    sweep_cmd->add_option("--values", sw_values, "Comma-separated margin values")->capture_default_str();
    sweep_cmd->add_option("--epochs", sw_cfg.epochs, "Training epochs per run")->capture_default_str();
    sweep_cmd->add_option("--batch-size", sw_cfg.batch_size, "Mini-batch size")->capture_default_str();
    sweep_cmd->add_option("--lr", sw_cfg.optimizer.lr, "RMSprop learning rate")->capture_default_str();
    sweep_cmd->add_option("--alpha", sw_cfg.optimizer.alpha, "RMSprop smoothing constant")
        ->capture_default_str();
    sweep_cmd->add_option("--eps", sw_cfg.optimizer.eps, "RMSprop epsilon")->capture_default_str();
    sweep_cmd->add_option("--seed", sw_cfg.seed, "Shared seed for every run")->capture_default_str();
    sweep_cmd->add_option("--eval-every", sw_cfg.eval_every, "Evaluate every N epochs")->capture_default_str();
    sweep_cmd->add_option("--threads", sw_threads, "Worker threads")->capture_default_str();

    app.failure_message([](const CLI::App*, const CLI::Error& e) {
        return std::string("error: ") + e.what() + "\n";
    });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        const auto manifest = make_synthetic_corpus(sy_speakers, sy_utterances, sy_seconds, sy_rate,
                                                    sy_seed, sy_out);
        std::cout << manifest.string() << "\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        set_num_threads(tr_threads);
        const TrainOutcome outcome =
            run_training(tr_model, tr_data, tr_cfg, tr_out, -1.0, tr_dump_config, tr_threads);
        std::cout << "final checkpoint: " << outcome.result.final_checkpoint.string() << "\n";
        if (outcome.has_eval) {
            std::cout << "test fer: " << outcome.final_eval.fer << "  cer: " << outcome.final_eval.cer << "\n";
        }
        return 0;
    }

    if (eval_cmd->parsed()) {
        set_num_threads(ev_threads);
        LoadedCheckpoint loaded = load_checkpoint(ev_checkpoint);
        const Manifest manifest = load_manifest(ev_data.manifest);
        if (manifest.speakers != loaded.labels) {
            throw ValueError("eval: manifest speakers do not match the checkpoint label map");
        }
        Split split;
        if (ev_split == "train") {
            split = Split::train;
        } else if (ev_split == "test") {
            split = Split::test;
        } else {
            throw ValueError("eval: --split must be train or test, got '" + ev_split + "'");
        }
        const FrameDataset ds = build_frame_dataset(manifest, split, resolve_dataset_options(ev_data));
        if (ds.window != loaded.model.config.window_samples) {
            throw ValueError("eval: window of " + std::to_string(ds.window) +
                             " samples does not match the checkpoint's window_samples = " +
                             std::to_string(loaded.model.config.window_samples));
        }
        const EvalReport report = evaluate(loaded.model, ds, {ev_batch});
        const std::string text = eval_report_json(report, loaded.labels);
        std::cout << text << "\n";
        if (!ev_out.empty()) {
            std::ofstream f(ev_out);
            if (!f) throw IoError("cannot write report '" + ev_out + "'");
            f << text << "\n";
        }
        return 0;
    }

    if (bench_cmd->parsed()) {
        set_num_threads(be_threads);
        Model model;
        if (!be_checkpoint.empty()) {
            model = load_checkpoint(be_checkpoint).model;
        } else {
            ModelConfig cfg = resolve_model_config(be_model);
            cfg.num_classes = be_classes;
            cfg.window_samples = static_cast<int>(be_window);
            cfg.validate();
            model = build_mobilenet1d(cfg, be_seed);
        }
        BenchReport report = measure_inference(model, be_batches, be_batch_size, be_window, be_warmup, be_seed);
        if (!be_checkpoint.empty()) {
            report.model_bytes = static_cast<std::int64_t>(std::filesystem::file_size(be_checkpoint));
        }
        const std::string text = bench_report_json(report);
        std::cout << text << "\n";
        if (!be_out.empty()) {
            std::ofstream f(be_out);
            if (!f) throw IoError("cannot write report '" + be_out + "'");
            f << text << "\n";
        }
        return 0;
    }

    if (info_cmd->parsed()) {
        std::cout << info_report_json(info_report(in_checkpoint)) << "\n";
        return 0;
    }

    if (sweep_cmd->parsed()) {
        set_num_threads(sw_threads);
        std::vector<double> margins;
        std::istringstream ss(sw_values);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            try {
                margins.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ValueError("sweep-margin: '" + tok + "' is not a number");
            }
        }
        if (margins.empty()) throw ValueError("sweep-margin: no margin values given");

        nlohmann::json table = nlohmann::json::array();
        std::cout << "margin  train_loss  fer        cer\n";
        for (double m : margins) {
            std::ostringstream dir_name;
            dir_name << "m_" << m;
            const std::filesystem::path run_dir = std::filesystem::path(sw_out) / dir_name.str();
            const TrainOutcome outcome = run_training(sw_model, sw_data, sw_cfg, run_dir, m, false, sw_threads);
            const double train_loss = outcome.result.log.empty() ? 0.0 : outcome.result.log.back().train_loss;
            const double fer = outcome.has_eval ? outcome.final_eval.fer : 0.0;
            const double cer = outcome.has_eval ? outcome.final_eval.cer : 0.0;
            char row[128];
            std::snprintf(row, sizeof(row), "%-7.3g %-11.5g %-10.5g %-10.5g", m, train_loss, fer, cer);
            std::cout << row << "\n";
            table.push_back({{"margin", m},
                             {"train_loss", train_loss},
                             {"fer", fer},
                             {"cer", cer},
                             {"run_dir", run_dir.string()}});
        }
        std::ofstream f(std::filesystem::path(sw_out) / "sweep.json");
        if (!f) throw IoError("cannot write sweep summary in '" + sw_out + "'");
        f << table.dump(2) << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace amnet::cli
