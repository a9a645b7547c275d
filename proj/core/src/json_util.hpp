#pragma once

// Internal helpers shared by the serialization paths. Not installed.

#include <json.hpp>

#include "amnet/config.hpp"

namespace amnet::detail {

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& b : cfg.bottlenecks) {
        stages.push_back({b.expansion_t, b.out_channels_c, b.repeats_n, b.first_stride_s});
    }
    return nlohmann::json{
        {"stem_channels", cfg.stem_channels},
        {"bottlenecks", stages},
        {"head_channels", cfg.head_channels},
        {"kernel_size", cfg.kernel_size},
        {"num_classes", cfg.num_classes},
        {"window_samples", cfg.window_samples},
        {"loss", loss_kind_name(cfg.loss)},
        {"scale_s", cfg.scale_s},
        {"margin_m", cfg.margin_m},
        {"loss_eps", cfg.loss_eps},
        {"bn_momentum", cfg.bn_momentum},
        {"bn_eps", cfg.bn_eps},
    };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.stem_channels = j.at("stem_channels").get<int>();
    cfg.bottlenecks.clear();
    for (const auto& row : j.at("bottlenecks")) {
        BottleneckSpec b;
        b.expansion_t = row.at(0).get<int>();
        b.out_channels_c = row.at(1).get<int>();
        b.repeats_n = row.at(2).get<int>();
        b.first_stride_s = row.at(3).get<int>();
        cfg.bottlenecks.push_back(b);
    }
    cfg.head_channels = j.at("head_channels").get<int>();
    cfg.kernel_size = j.at("kernel_size").get<int>();
    cfg.num_classes = j.at("num_classes").get<int>();
    cfg.window_samples = j.at("window_samples").get<int>();
    cfg.loss = loss_kind_from_name(j.at("loss").get<std::string>());
    cfg.scale_s = j.at("scale_s").get<double>();
    cfg.margin_m = j.at("margin_m").get<double>();
    cfg.loss_eps = j.at("loss_eps").get<double>();
    cfg.bn_momentum = j.at("bn_momentum").get<double>();
    cfg.bn_eps = j.at("bn_eps").get<double>();
    return cfg;
}

}  // namespace amnet::detail
