#include "amnet/config.hpp"

#include <sstream>

#include "amnet/errors.hpp"

namespace amnet {

std::string loss_kind_name(LossKind k) { return k == LossKind::softmax ? "softmax" : "am_softmax"; }

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "softmax") return LossKind::softmax;
    if (name == "am_softmax") return LossKind::am_softmax;
    throw ValueError("unknown loss kind '" + name + "' (expected softmax or am_softmax)");
}

void ModelConfig::validate() const {
    if (stem_channels < 1) throw ValueError("config: stem_channels must be positive");
    if (head_channels < 1) throw ValueError("config: head_channels must be positive");
    if (kernel_size < 1) throw ValueError("config: kernel_size must be positive");
    if (num_classes < 2) throw ValueError("config: num_classes must be at least 2");
    if (window_samples < kernel_size) throw ValueError("config: window_samples must be >= kernel_size");
    if (bottlenecks.empty()) throw ValueError("config: bottlenecks must not be empty");
    for (std::size_t i = 0; i < bottlenecks.size(); ++i) {
        const auto& s = bottlenecks[i];
        const std::string at = "config: bottlenecks[" + std::to_string(i) + "].";
        if (s.expansion_t < 1) throw ValueError(at + "expansion_t must be positive");
        if (s.out_channels_c < 1) throw ValueError(at + "out_channels_c must be positive");
        if (s.repeats_n < 1) throw ValueError(at + "repeats_n must be positive");
        if (s.first_stride_s != 1 && s.first_stride_s != 2) throw ValueError(at + "first_stride_s must be 1 or 2");
    }
    if (scale_s <= 0.0) throw ValueError("config: scale_s must be positive");
    if (margin_m < 0.0 || margin_m > 1.0) throw ValueError("config: margin_m must be in [0, 1]");
    if (loss_eps <= 0.0) throw ValueError("config: loss_eps must be positive");
    if (bn_momentum <= 0.0 || bn_momentum >= 1.0) throw ValueError("config: bn_momentum must be in (0, 1)");
    if (bn_eps <= 0.0) throw ValueError("config: bn_eps must be positive");
}

int ModelConfig::total_stride() const {
    int s = 2;  // stem
    for (const auto& b : bottlenecks) s *= b.first_stride_s;
    return s;
}

ModelConfig default_config() {
    ModelConfig cfg;
    cfg.stem_channels = 32;
    cfg.bottlenecks = {
        {1, 16, 1, 1}, {6, 24, 2, 2}, {6, 32, 3, 2}, {6, 64, 4, 2},
        {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1},
    };
    cfg.head_channels = 1280;
    cfg.kernel_size = 3;
    return cfg;
}

ModelConfig desk_config() {
    ModelConfig cfg;
    cfg.stem_channels = 8;
    cfg.bottlenecks = {{1, 8, 1, 1}, {6, 12, 1, 2}, {6, 16, 1, 2}, {6, 24, 1, 2}};
    cfg.head_channels = 48;
    // Wide depthwise kernels: the pre-pool receptive field must cover at
    // least one pitch period (200 samples at 16 kHz for an 80 Hz voice) or
    // the features stay phase-sensitive and do not transfer across
    // utterances.
    cfg.kernel_size = 15;
    return cfg;
}

ModelConfig toy_config() {
    ModelConfig cfg;
    cfg.stem_channels = 4;
    cfg.bottlenecks = {{1, 4, 1, 1}};
    cfg.head_channels = 8;
    cfg.kernel_size = 3;
    cfg.window_samples = 512;
    return cfg;
}

ModelConfig preset_config(const std::string& name) {
    if (name == "default") return default_config();
    if (name == "desk") return desk_config();
    if (name == "toy") return toy_config();
    throw ValueError("unknown preset '" + name + "' (expected default, desk or toy)");
}

bool operator==(const BottleneckSpec& a, const BottleneckSpec& b) {
    return a.expansion_t == b.expansion_t && a.out_channels_c == b.out_channels_c &&
           a.repeats_n == b.repeats_n && a.first_stride_s == b.first_stride_s;
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
    return a.stem_channels == b.stem_channels && a.bottlenecks == b.bottlenecks &&
           a.head_channels == b.head_channels && a.kernel_size == b.kernel_size &&
           a.num_classes == b.num_classes && a.window_samples == b.window_samples && a.loss == b.loss &&
           a.scale_s == b.scale_s && a.margin_m == b.margin_m && a.loss_eps == b.loss_eps &&
           a.bn_momentum == b.bn_momentum && a.bn_eps == b.bn_eps;
}

std::vector<BottleneckSpec> parse_bottlenecks(const std::string& text) {
    std::vector<BottleneckSpec> specs;
    std::istringstream stages(text);
    std::string stage;
    while (std::getline(stages, stage, ';')) {
        if (stage.empty()) continue;
        BottleneckSpec s;
        std::istringstream fields(stage);
        std::string tok;
        int vals[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(fields, tok, ',')) throw ValueError("bottleneck stage '" + stage + "' needs t,c,n,s");
            try {
                vals[i] = std::stoi(tok);
            } catch (const std::exception&) {
                throw ValueError("bottleneck stage '" + stage + "': '" + tok + "' is not an integer");
            }
        }
        if (std::getline(fields, tok, ',')) throw ValueError("bottleneck stage '" + stage + "' has extra fields");
        s.expansion_t = vals[0];
        s.out_channels_c = vals[1];
        s.repeats_n = vals[2];
        s.first_stride_s = vals[3];
        specs.push_back(s);
    }
    if (specs.empty()) throw ValueError("bottleneck table '" + text + "' is empty");
    return specs;
}

std::string format_bottlenecks(const std::vector<BottleneckSpec>& specs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i) os << ";";
        os << specs[i].expansion_t << "," << specs[i].out_channels_c << "," << specs[i].repeats_n << ","
           << specs[i].first_stride_s;
    }
    return os.str();
}

std::string describe(const ModelConfig& cfg) {
    std::ostringstream os;
    os << "stem_channels:  " << cfg.stem_channels << "\n"
       << "bottlenecks:    " << format_bottlenecks(cfg.bottlenecks) << "\n"
       << "head_channels:  " << cfg.head_channels << "\n"
       << "kernel_size:    " << cfg.kernel_size << "\n"
       << "num_classes:    " << cfg.num_classes << "\n"
       << "window_samples: " << cfg.window_samples << "\n"
       << "loss:           " << loss_kind_name(cfg.loss) << "\n"
       << "scale_s:        " << cfg.scale_s << "\n"
       << "margin_m:       " << cfg.margin_m << "\n"
       << "loss_eps:       " << cfg.loss_eps << "\n"
       << "bn_momentum:    " << cfg.bn_momentum << "\n"
       << "bn_eps:         " << cfg.bn_eps << "\n";
    return os.str();
}

}  // namespace amnet
