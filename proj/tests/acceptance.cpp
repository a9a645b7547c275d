// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "amnet/bench.hpp"
#include "amnet/checkpoint.hpp"
#include "amnet/losses.hpp"
#include "amnet/synth.hpp"
#include "amnet/train.hpp"
#include "test_util.hpp"

using namespace amnet;
using amnet::testing::ScopedTempDir;
using amnet::testing::random_tensor;
using amnet::testing::random_tensor_off_kinks;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void report_exception(int id, const std::string& name, const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- criterion 1

void criterion_parameter_count(const std::filesystem::path& default_checkpoint) {
    const std::string name = "parameter-count anchor and head-delta identity";
    try {
        ModelConfig cfg = default_config();
        cfg.num_classes = 462;
        Model model = build_mobilenet1d(cfg, 1234);
        const std::int64_t total = count_parameters(model);
        const bool in_range = total >= 2600000 && total <= 3100000;

        const InfoReport info = info_report(default_checkpoint);
        const bool delta_printed = info.param_delta == total - kReferenceParamCount;

        bool head_identity = true;
        for (LossKind kind : {LossKind::am_softmax, LossKind::softmax}) {
            ModelConfig small = default_config();
            small.num_classes = 48;
            small.loss = kind;
            ModelConfig big = small;
            big.num_classes = 462;
            Model m_small = build_mobilenet1d(small, 0);
            Model m_big = build_mobilenet1d(big, 0);
            const std::int64_t bias_term = kind == LossKind::softmax ? 1 : 0;
            if (count_parameters(m_big) - count_parameters(m_small) !=
                414 * (small.head_channels + bias_term)) {
                head_identity = false;
            }
        }

        std::ostringstream detail;
        detail << "total=" << total << ", delta=" << info.param_delta << " vs " << kReferenceParamCount
               << ", head identity " << (head_identity ? "exact" : "BROKEN");
        report(1, name, in_range && delta_printed && head_identity, detail.str());
    } catch (const std::exception& e) {
        report_exception(1, name, e);
    }
}

// ---------------------------------------------------------------- criterion 2

void criterion_model_size(const std::filesystem::path& default_checkpoint) {
    const std::string name = "model-size anchor";
    try {
        const InfoReport info = info_report(default_checkpoint);
        const bool identity = info.model_bytes == 4 * info.params_total + info.header_bytes;
        const bool bounded = info.model_bytes <= 12500000;
        std::ostringstream detail;
        detail << "bytes=" << info.model_bytes << " = 4*" << info.params_total << " + "
               << info.header_bytes << " header; " << info.size_mb << " MB vs " << kReferenceModelMb
               << " MB reference";
        report(2, name, identity && bounded, detail.str());
    } catch (const std::exception& e) {
        report_exception(2, name, e);
    }
}

// ---------------------------------------------------------------- criterion 3

void criterion_gradients() {
    const std::string name = "gradient suite (rel. error <= 1e-4, seed 1234)";
    try {
        std::ostringstream detail;
        double worst = 0.0;
        auto track = [&](const char* what, double err) {
            worst = std::max(worst, err);
            detail << what << "=" << err << " ";
        };

        {
            const Tensor x = random_tensor({2, 3, 12}, 1234);
            const Tensor w = random_tensor({4, 3, 3}, 99);
            track("conv1d_x", grad_check(
                                  [&](const Tensor& t, Tape& tape) {
                                      const Tensor y = conv1d(t, w, nullptr, 2, 1, 1, &tape);
                                      return sum(mul(y, y, &tape), &tape);
                                  },
                                  x, 1e-5));
            track("conv1d_w", grad_check(
                                  [&](const Tensor& t, Tape& tape) {
                                      const Tensor y = conv1d(x, t, nullptr, 2, 1, 1, &tape);
                                      return sum(mul(y, y, &tape), &tape);
                                  },
                                  w, 1e-5));
        }
        {
            // Weighted-sum probe: sum(y^2) of a batchnorm output is constant
            // in x, leaving only cancellation noise to compare.
            const Tensor x = random_tensor({3, 2, 7}, 1234, -2.0, 2.0);
            const Tensor gamma = Tensor::from({2}, {1.3, 0.7});
            const Tensor beta = Tensor::from({2}, {0.1, -0.2});
            const Tensor probe = random_tensor({3, 2, 7}, 555);
            track("batchnorm_train", grad_check(
                                         [&](const Tensor& t, Tape& tape) {
                                             Tensor rm = Tensor::zeros({2});
                                             Tensor rv = Tensor::full({2}, 1.0);
                                             const Tensor y = batchnorm1d(t, gamma, beta, rm, rv,
                                                                          Mode::train, 0.1, 1e-5, &tape);
                                             return sum(mul(y, probe, &tape), &tape);
                                         },
                                         x, 1e-5));
        }
        {
            const Tensor x = random_tensor({3, 4}, 1234);
            const Tensor w = random_tensor({2, 4}, 9);
            const Tensor b = random_tensor({2}, 10);
            track("linear", grad_check(
                                [&](const Tensor& t, Tape& tape) {
                                    const Tensor y = linear(t, w, &b, &tape);
                                    return sum(mul(y, y, &tape), &tape);
                                },
                                x, 1e-5));
        }
        {
            const Tensor x = random_tensor_off_kinks({2, 3, 12}, 1234);
            const Tensor w = random_tensor({4, 3, 3}, 7);
            track("conv_relu6", grad_check(
                                    [&](const Tensor& t, Tape& tape) {
                                        const Tensor y = relu6(conv1d(t, w, nullptr, 1, 1, 1, &tape), &tape);
                                        return sum(mul(y, y, &tape), &tape);
                                    },
                                    x, 1e-5));
        }
        {
            const Tensor logits = random_tensor({4, 5}, 1234);
            const std::vector<int> targets{1, 0, 4, 2};
            track("softmax_ce", grad_check(
                                    [&](const Tensor& z, Tape& tape) {
                                        return softmax_cross_entropy(z, targets, &tape);
                                    },
                                    logits, 1e-5));
        }
        {
            const Tensor features = random_tensor({4, 6}, 1234, -1.0, 1.0);
            const Tensor weight = random_tensor({5, 6}, 99, -1.0, 1.0);
            const std::vector<int> targets{0, 2, 4, 1};
            const AmSoftmaxParams params{30.0, 0.5, 1e-11};
            track("am_features", grad_check(
                                     [&](const Tensor& f, Tape& tape) {
                                         return am_softmax_loss(f, weight, targets, params, &tape);
                                     },
                                     features, 1e-6));
            track("am_weight", grad_check(
                                   [&](const Tensor& w, Tape& tape) {
                                       return am_softmax_loss(features, w, targets, params, &tape);
                                   },
                                   weight, 1e-6));
        }
        {
            ModelConfig cfg = toy_config();
            cfg.num_classes = 2;
            cfg.window_samples = 64;
            cfg.loss = LossKind::am_softmax;
            Model m = build_mobilenet1d(cfg, 1234);
            const std::vector<int> targets{1};
            // Moderate scale keeps the untrained softmax unsaturated so the
            // finite-difference oracle can resolve the input gradients.
            const AmSoftmaxParams params{4.0, 0.5, 1e-11};
            const Tensor frame = random_tensor({1, 1, 64}, 1234);
            track("end_to_end", grad_check(
                                    [&](const Tensor& x, Tape& tape) {
                                        const Tensor f = m.forward(x, Mode::train, &tape);
                                        return am_softmax_loss(f, m.classifier_weight, targets, params, &tape);
                                    },
                                    frame, 1e-6));
        }
        report(3, name, worst <= 1e-4, "worst=" + std::to_string(worst));
    } catch (const std::exception& e) {
        report_exception(3, name, e);
    }
}

// ---------------------------------------------------------------- criterion 4

void criterion_loss_identities() {
    const std::string name = "additive-margin loss identities";
    try {
        const Tensor features = random_tensor({5, 8}, 1234, -2.0, 2.0);
        const Tensor weight = random_tensor({7, 8}, 77, -1.0, 1.0);
        const std::vector<int> targets{0, 3, 6, 2, 2};
        const double eps = 1e-11;
        const double am = am_softmax_loss(features, weight, targets, {1.0, 0.0, eps}).item();
        const double ce = softmax_cross_entropy(cosine_logits(features, weight, eps), targets).item();
        const bool margin_free = std::abs(am - ce) < 1e-12;

        const Tensor f2 = Tensor::from({1, 2}, {1.0, 0.0});
        const Tensor w2 = Tensor::from({2, 2}, {0.8, 0.6, 0.2, std::sqrt(0.96)});
        const std::vector<int> t2{0};
        const double hand = am_softmax_loss(f2, w2, t2, {30.0, 0.5, eps}).item();
        const bool hand_ok = std::abs(hand - std::log1p(std::exp(-3.0))) < 1e-9;

        bool monotone = true;
        double prev = -1.0;
        for (int i = 0; i <= 8; ++i) {
            const double loss = am_softmax_loss(features, weight, targets, {30.0, 0.1 * i, eps}).item();
            if (loss < prev) monotone = false;
            prev = loss;
        }

        std::ostringstream detail;
        detail << "margin-free diff ok=" << margin_free << ", hand value=" << hand
               << " vs ln(1+e^-3), monotone=" << monotone;
        report(4, name, margin_free && hand_ok && monotone, detail.str());
    } catch (const std::exception& e) {
        report_exception(4, name, e);
    }
}

// ---------------------------------------------------------------- criterion 5

void criterion_separable_oracle() {
    const std::string name = "separable convolution equals composed dense kernel (1e-10)";
    try {
        double worst = 0.0;
        std::uint64_t seed = 1234;
        for (int c = 1; c <= 4; ++c) {
            for (int cout = 1; cout <= 4; ++cout) {
                for (int len : {4, 7, 12, 16}) {
                    for (int stride : {1, 2}) {
                        const int k = 3;
                        const Tensor x = random_tensor({2, c, len}, seed++);
                        const Tensor dw = random_tensor({c, 1, k}, seed++);
                        const Tensor pw = random_tensor({cout, c, 1}, seed++);
                        const Tensor separable =
                            conv1d(conv1d(x, dw, nullptr, stride, 1, c), pw, nullptr, 1, 0, 1);
                        Tensor dense({cout, c, k});
                        for (int co = 0; co < cout; ++co)
                            for (int ci = 0; ci < c; ++ci)
                                for (int kk = 0; kk < k; ++kk)
                                    dense.data()[(co * c + ci) * k + kk] =
                                        pw.data()[static_cast<std::size_t>(co * c + ci)] *
                                        dw.data()[static_cast<std::size_t>(ci * k + kk)];
                        const Tensor direct = conv1d(x, dense, nullptr, stride, 1, 1);
                        worst = std::max(worst, amnet::testing::max_abs_diff(separable, direct));
                    }
                }
            }
        }
        report(5, name, worst < 1e-10, "max abs diff=" + std::to_string(worst));
    } catch (const std::exception& e) {
        report_exception(5, name, e);
    }
}

// ---------------------------------------------------------------- criterion 6

void criterion_optimizer_oracle() {
    const std::string name = "RMSprop single-step hand value (1e-7)";
    try {
        Tensor p = Tensor::from({1}, {1.0}, true);
        p.grad()[0] = 0.5;
        Rmsprop opt({{"p", p}}, {0.001, 0.95, 1e-7});
        opt.step();
        const double expected = 1.0 - 0.001 * 0.5 / (std::sqrt(0.0125) + 1e-7);
        const bool ok = std::abs(p.data()[0] - 0.9955279) < 1e-7 && std::abs(p.data()[0] - expected) < 1e-15;
        std::ostringstream detail;
        detail << "p=" << p.data()[0] << " vs 0.9955279";
        report(6, name, ok, detail.str());
    } catch (const std::exception& e) {
        report_exception(6, name, e);
    }
}

// ---------------------------------------------------------------- criterion 7

void criterion_metric_oracle() {
    const std::string name = "FER/CER match brute-force scorer on 100 tables";
    try {
        Rng rng(1234);
        bool all_equal = true;
        for (int table = 0; table < 100 && all_equal; ++table) {
            const int classes = 2 + static_cast<int>(rng.below(7));
            const int num_utts = 1 + static_cast<int>(rng.below(20));
            std::vector<int> utt_labels, frame_labels, frame_utt;
            std::vector<std::string> utt_ids;
            std::vector<double> logprobs;
            for (int u = 0; u < num_utts; ++u) {
                utt_labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
                utt_ids.push_back("u" + std::to_string(u));
                const int frames = 1 + static_cast<int>(rng.below(20));
                for (int f = 0; f < frames; ++f) {
                    frame_labels.push_back(utt_labels.back());
                    frame_utt.push_back(u);
                    for (int j = 0; j < classes; ++j) logprobs.push_back(rng.uniform(-5.0, 0.0));
                }
            }
            const EvalReport rep =
                score_frame_table(logprobs, classes, frame_labels, frame_utt, utt_ids, utt_labels);

            // Brute force, recomputed from scratch.
            const int n = static_cast<int>(frame_labels.size());
            int frames_wrong = 0;
            for (int i = 0; i < n; ++i) {
                int best = 0;
                for (int j = 0; j < classes; ++j) {
                    if (logprobs[static_cast<std::size_t>(i * classes + j)] >
                        logprobs[static_cast<std::size_t>(i * classes + best)]) {
                        best = j;
                    }
                }
                if (best != frame_labels[static_cast<std::size_t>(i)]) ++frames_wrong;
            }
            int utts_wrong = 0;
            for (int u = 0; u < num_utts; ++u) {
                std::vector<double> total(static_cast<std::size_t>(classes), 0.0);
                for (int i = 0; i < n; ++i) {
                    if (frame_utt[static_cast<std::size_t>(i)] != u) continue;
                    for (int j = 0; j < classes; ++j) {
                        total[static_cast<std::size_t>(j)] += logprobs[static_cast<std::size_t>(i * classes + j)];
                    }
                }
                int best = 0;
                for (int j = 0; j < classes; ++j) {
                    if (total[static_cast<std::size_t>(j)] > total[static_cast<std::size_t>(best)]) best = j;
                }
                if (best != utt_labels[static_cast<std::size_t>(u)]) ++utts_wrong;
            }
            if (rep.fer != static_cast<double>(frames_wrong) / n) all_equal = false;
            if (rep.cer != static_cast<double>(utts_wrong) / num_utts) all_equal = false;
        }
        report(7, name, all_equal, all_equal ? "exact match on all tables" : "mismatch found");
    } catch (const std::exception& e) {
        report_exception(7, name, e);
    }
}

// ---------------------------------------------------------------- criterion 8

struct DeskRun {
    double final_fer = 1.0;
    double final_cer = 1.0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

DeskRun desk_training(const FrameDataset& train_set, const FrameDataset& test_set,
                      const std::vector<std::string>& speakers, LossKind kind,
                      const std::filesystem::path& run_dir) {
    ModelConfig cfg = desk_config();
    cfg.num_classes = static_cast<int>(speakers.size());
    cfg.window_samples = static_cast<int>(train_set.window);
    cfg.loss = kind;

    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 128;
    tc.eval_every = 10;
    tc.seed = 1234;
    tc.hop_ms = 190.0;

    Model model = build_mobilenet1d(cfg, tc.seed);
    const TrainResult result = train(model, train_set, test_set, speakers, tc, run_dir);

    DeskRun run;
    run.initial_loss = result.log.front().train_loss;
    run.final_loss = result.log.back().train_loss;
    const EvalReport report = evaluate(model, test_set, {tc.batch_size});
    run.final_fer = report.fer;
    run.final_cer = report.cer;
    return run;
}

void criterion_desk_learning(const std::filesystem::path& work) {
    const std::string name = "desk-scale learning (AM fer<=5%, cer=0, AM<=softmax)";
    try {
        const auto manifest_path = make_synthetic_corpus(10, 10, 2.0, 16000, 1234, work / "corpus");
        const Manifest manifest = load_manifest(manifest_path);
        DatasetOptions opt;
        opt.window_ms = 200.0;
        opt.hop_ms = 190.0;
        const FrameDataset train_set = build_frame_dataset(manifest, Split::train, opt);
        const FrameDataset test_set = build_frame_dataset(manifest, Split::test, opt);

        const DeskRun am = desk_training(train_set, test_set, manifest.speakers,
                                         LossKind::am_softmax, work / "run_am");
        const DeskRun sm = desk_training(train_set, test_set, manifest.speakers,
                                         LossKind::softmax, work / "run_softmax");

        const bool fer_ok = am.final_fer <= 0.05;
        const bool cer_ok = am.final_cer == 0.0;
        const bool am_wins = am.final_fer <= sm.final_fer;
        const bool loss_drop = am.final_loss < 0.2 * am.initial_loss;

        std::ostringstream detail;
        detail << "am fer=" << am.final_fer << " cer=" << am.final_cer << "; softmax fer=" << sm.final_fer
               << "; am loss " << am.initial_loss << " -> " << am.final_loss;
        report(8, name, fer_ok && cer_ok && am_wins && loss_drop, detail.str());
    } catch (const std::exception& e) {
        report_exception(8, name, e);
    }
}

// ---------------------------------------------------------------- criterion 9

void criterion_determinism(const std::filesystem::path& work) {
    const std::string name = "determinism and 32-bit serialization fixpoint";
    try {
        const auto manifest_path = make_synthetic_corpus(4, 4, 0.5, 8000, 1234, work / "det_corpus");
        const Manifest manifest = load_manifest(manifest_path);
        DatasetOptions opt;
        opt.hop_ms = 100.0;
        const FrameDataset train_set = build_frame_dataset(manifest, Split::train, opt);
        const FrameDataset test_set = build_frame_dataset(manifest, Split::test, opt);

        ModelConfig cfg = toy_config();
        cfg.num_classes = manifest.num_classes();
        cfg.window_samples = static_cast<int>(train_set.window);

        TrainConfig tc;
        tc.epochs = 3;
        tc.batch_size = 32;
        tc.eval_every = 2;
        for (const char* run : {"det_a", "det_b"}) {
            Model model = build_mobilenet1d(cfg, tc.seed);
            train(model, train_set, test_set, manifest.speakers, tc, work / run);
        }
        const bool logs_equal =
            read_bytes(work / "det_a/metrics.jsonl") == read_bytes(work / "det_b/metrics.jsonl");
        const bool ckpt_equal = read_bytes(work / "det_a/checkpoint_final.amn") ==
                                read_bytes(work / "det_b/checkpoint_final.amn");

        // save -> load -> save is byte-identical, and evaluation of the
        // loaded model is exactly reproducible.
        LoadedCheckpoint loaded = load_checkpoint(work / "det_a/checkpoint_final.amn");
        save_checkpoint(loaded.model, loaded.labels, work / "roundtrip.amn");
        const bool fixpoint =
            read_bytes(work / "det_a/checkpoint_final.amn") == read_bytes(work / "roundtrip.amn");
        const EvalReport r1 = evaluate(loaded.model, test_set, {32});
        LoadedCheckpoint again = load_checkpoint(work / "roundtrip.amn");
        const EvalReport r2 = evaluate(again.model, test_set, {32});
        const bool eval_equal = r1.fer == r2.fer && r1.cer == r2.cer && r1.mean_loss == r2.mean_loss;

        std::ostringstream detail;
        detail << "logs=" << logs_equal << " checkpoints=" << ckpt_equal << " fixpoint=" << fixpoint
               << " eval=" << eval_equal;
        report(9, name, logs_equal && ckpt_equal && fixpoint && eval_equal, detail.str());
    } catch (const std::exception& e) {
        report_exception(9, name, e);
    }
}

// --------------------------------------------------------------- criterion 10

void criterion_bench_protocol() {
    const std::string name = "bench protocol (6561 batches of 128)";
    try {
        const TimingStats stats = summarize_timings({1.0, 2.0, 3.0});
        const bool stats_ok = std::abs(stats.mean_ms - 2.0) < 1e-12 &&
                              std::abs(stats.std_ms - std::sqrt(2.0 / 3.0)) < 1e-12;

        ModelConfig cfg = toy_config();
        cfg.num_classes = 10;
        cfg.window_samples = 512;
        Model model = build_mobilenet1d(cfg, 1234);
        const BenchReport report_full = measure_inference(model, 6561, 128, 512, 10, 1234);
        const bool ran = report_full.batches == 6561 && report_full.batch_size == 128 &&
                         report_full.mean_ms > 0.0 && report_full.std_ms >= 0.0;

        std::ostringstream detail;
        detail << "mean=" << report_full.mean_ms << " ms, std=" << report_full.std_ms
               << " ms per batch on this hardware; reference line " << kReferenceBatchMs
               << " ms (not a threshold); injected-stats ok=" << stats_ok;
        report(10, name, stats_ok && ran, detail.str());
    } catch (const std::exception& e) {
        report_exception(10, name, e);
    }
}

}  // namespace

int main() {
    ScopedTempDir work("acceptance");

    // Criteria 1 and 2 share the default 462-class checkpoint.
    std::filesystem::path default_checkpoint = work.path() / "default462.amn";
    try {
        ModelConfig cfg = default_config();
        cfg.num_classes = 462;
        Model model = build_mobilenet1d(cfg, 1234);
        std::vector<std::string> labels;
        for (int i = 0; i < 462; ++i) {
            char name[16];
            std::snprintf(name, sizeof(name), "spk%03d", i);
            labels.emplace_back(name);
        }
        save_checkpoint(model, labels, default_checkpoint);
    } catch (const std::exception& e) {
        std::printf("FAIL  setup: could not build the default checkpoint (%s)\n", e.what());
        return 1;
    }

    criterion_parameter_count(default_checkpoint);
    criterion_model_size(default_checkpoint);
    criterion_gradients();
    criterion_loss_identities();
    criterion_separable_oracle();
    criterion_optimizer_oracle();
    criterion_metric_oracle();
    criterion_desk_learning(work.path());
    criterion_determinism(work.path());
    criterion_bench_protocol();

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
