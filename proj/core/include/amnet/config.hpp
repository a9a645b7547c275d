#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace amnet {

enum class LossKind { softmax, am_softmax };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

// One stage of the backbone: `repeats_n` inverted residual blocks expanding
// by `expansion_t` to `out_channels_c`. Only the first block of the stage
// uses `first_stride_s`; the rest run at stride 1.
struct BottleneckSpec {
    int expansion_t = 1;
    int out_channels_c = 1;
    int repeats_n = 1;
    int first_stride_s = 1;
};

// Full architectural description. The single source of truth for the
// parameter count and for everything the checkpoint needs to rebuild the net.
struct ModelConfig {
    int stem_channels = 32;
    std::vector<BottleneckSpec> bottlenecks;
    int head_channels = 1280;
    int kernel_size = 3;  // depthwise kernel
    int num_classes = 2;
    int window_samples = 3200;
    LossKind loss = LossKind::am_softmax;
    double scale_s = 30.0;
    double margin_m = 0.5;
    double loss_eps = 1e-11;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    // Throws ValueError naming the offending field.
    void validate() const;

    // Product of the stem stride and every stage stride.
    int total_stride() const;
};

// MobileNetV2 stage table with every spatial op made 1-D; depthwise K=3.
ModelConfig default_config();
// Reduced-width variant for desk-scale training runs.
ModelConfig desk_config();
// Minimal net for unit tests and fast protocol checks.
ModelConfig toy_config();

ModelConfig preset_config(const std::string& name);

bool operator==(const BottleneckSpec& a, const BottleneckSpec& b);
bool operator==(const ModelConfig& a, const ModelConfig& b);

// Stage table round-trip through the CLI syntax "t,c,n,s;t,c,n,s;...".
std::vector<BottleneckSpec> parse_bottlenecks(const std::string& text);
std::string format_bottlenecks(const std::vector<BottleneckSpec>& specs);

// Human-readable multi-line description.
std::string describe(const ModelConfig& cfg);

}  // namespace amnet
