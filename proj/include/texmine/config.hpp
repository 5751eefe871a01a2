#ifndef TEXMINE_CONFIG_HPP
#define TEXMINE_CONFIG_HPP

#include "texmine/detector.hpp"
#include "texmine/pbr.hpp"
#include "texmine/rng.hpp"

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>

namespace texmine {

struct PipelineConfig {
    std::filesystem::path input_dir = "images";
    std::filesystem::path output_dir = "texmine_out";
    std::uint64_t seed = 0;
    int resize_long_edge = 1600;
    GridParams grid;
    DetectParams detect;
    int min_crop_px = 240;
    int max_crop_px = 1000;
    bool generate_pbr = true;
    int mixes_per_material = 0;
    int jobs = 0; ///< 0 = hardware concurrency
    SynthParams synth;

    CropBounds bounds() const { return {min_crop_px, max_crop_px}; }

    void validate() const {
        grid.validate();
        detect.validate();
        if (input_dir.empty() || output_dir.empty())
            throw InvalidArgument("input_dir and output_dir must be set");
        if (resize_long_edge < 1)
            throw InvalidArgument("resize_long_edge must be >= 1");
        if (min_crop_px < 1 || min_crop_px > max_crop_px)
            throw InvalidArgument("require 1 <= min_crop_px <= max_crop_px");
        if (mixes_per_material < 0 || jobs < 0)
            throw InvalidArgument("mixes_per_material and jobs must be >= 0");
    }
};

namespace detail {
template <typename T>
void read_toml(const toml::node_view<const toml::node>& node, T& dst) {
    if (!node)
        return;
    if (auto v = node.value<T>())
        dst = *v;
    else
        throw InvalidArgument("config key has the wrong type");
}
} // namespace detail

/// Overlays keys present in `tbl` onto `cfg`.
inline void apply_toml(const toml::table& tbl, PipelineConfig& cfg) {
    const toml::node_view<const toml::node> root{tbl};
    std::string input = cfg.input_dir.string(), output = cfg.output_dir.string();
    detail::read_toml(root["input_dir"], input);
    detail::read_toml(root["output_dir"], output);
    cfg.input_dir = input;
    cfg.output_dir = output;
    std::int64_t seed = static_cast<std::int64_t>(cfg.seed);
    detail::read_toml(root["seed"], seed);
    cfg.seed = static_cast<std::uint64_t>(seed);
    detail::read_toml(root["resize_long_edge"], cfg.resize_long_edge);
    detail::read_toml(root["min_crop_px"], cfg.min_crop_px);
    detail::read_toml(root["max_crop_px"], cfg.max_crop_px);
    detail::read_toml(root["generate_pbr"], cfg.generate_pbr);
    detail::read_toml(root["mixes_per_material"], cfg.mixes_per_material);
    detail::read_toml(root["jobs"], cfg.jobs);
    detail::read_toml(root["grid"]["cell_px"], cfg.grid.cell_px);
    detail::read_toml(root["grid"]["bins"], cfg.grid.bins);
    detail::read_toml(root["detect"]["threshold"], cfg.detect.threshold);
    detail::read_toml(root["detect"]["min_cells"], cfg.detect.min_cells);
    detail::read_toml(root["detect"]["max_cells"], cfg.detect.max_cells);
    detail::read_toml(root["detect"]["flat_std"], cfg.detect.flat_std);
    detail::read_toml(root["detect"]["overlap_iou"], cfg.detect.overlap_iou);
    auto synth = root["synth"];
    detail::read_toml(synth["p_uniform"], cfg.synth.p_uniform);
    detail::read_toml(synth["p_augment"], cfg.synth.p_augment);
    detail::read_toml(synth["p_hue_rotation"], cfg.synth.p_hue_rotation);
    detail::read_toml(synth["p_per_property_mix"], cfg.synth.p_per_property_mix);
}

inline PipelineConfig parse_config_toml(std::string_view text, PipelineConfig base = {}) {
    try {
        apply_toml(toml::parse(text), base);
    } catch (const toml::parse_error& e) {
        throw InvalidArgument(std::string("invalid TOML: ") + std::string(e.description()));
    }
    return base;
}

inline PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {}) {
    try {
        apply_toml(toml::parse_file(path.string()), base);
    } catch (const toml::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + std::string(e.description()));
    }
    return base;
}

inline std::string config_to_toml(const PipelineConfig& cfg) {
    toml::table grid{{"cell_px", cfg.grid.cell_px}, {"bins", cfg.grid.bins}};
    toml::table detect{{"threshold", cfg.detect.threshold},
                       {"min_cells", cfg.detect.min_cells},
                       {"max_cells", cfg.detect.max_cells},
                       {"flat_std", cfg.detect.flat_std},
                       {"overlap_iou", cfg.detect.overlap_iou}};
    toml::table synth{{"p_uniform", cfg.synth.p_uniform},
                      {"p_augment", cfg.synth.p_augment},
                      {"p_hue_rotation", cfg.synth.p_hue_rotation},
                      {"p_per_property_mix", cfg.synth.p_per_property_mix}};
    toml::table root{{"input_dir", cfg.input_dir.string()},
                     {"output_dir", cfg.output_dir.string()},
                     {"seed", static_cast<std::int64_t>(cfg.seed)},
                     {"resize_long_edge", cfg.resize_long_edge},
                     {"min_crop_px", cfg.min_crop_px},
                     {"max_crop_px", cfg.max_crop_px},
                     {"generate_pbr", cfg.generate_pbr},
                     {"mixes_per_material", cfg.mixes_per_material},
                     {"jobs", cfg.jobs},
                     {"grid", std::move(grid)},
                     {"detect", std::move(detect)},
                     {"synth", std::move(synth)}};
    std::ostringstream out;
    out << root << "\n";
    return out.str();
}

/// Config fields that influence outputs. Worker count and output location are
/// left out so manifests compare equal across them.
inline nlohmann::json config_snapshot(const PipelineConfig& cfg) {
    return {
        {"input_dir", cfg.input_dir.generic_string()},
        {"seed", cfg.seed},
        {"resize_long_edge", cfg.resize_long_edge},
        {"grid", {{"cell_px", cfg.grid.cell_px}, {"bins", cfg.grid.bins}}},
        {"detect",
         {{"threshold", cfg.detect.threshold},
          {"min_cells", cfg.detect.min_cells},
          {"max_cells", cfg.detect.max_cells},
          {"flat_std", cfg.detect.flat_std},
          {"overlap_iou", cfg.detect.overlap_iou}}},
        {"min_crop_px", cfg.min_crop_px},
        {"max_crop_px", cfg.max_crop_px},
        {"generate_pbr", cfg.generate_pbr},
        {"mixes_per_material", cfg.mixes_per_material},
        {"synth",
         {{"p_uniform", cfg.synth.p_uniform},
          {"p_augment", cfg.synth.p_augment},
          {"p_hue_rotation", cfg.synth.p_hue_rotation},
          {"p_per_property_mix", cfg.synth.p_per_property_mix}}},
    };
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string config_hash(const PipelineConfig& cfg) { return hex64(fnv1a64(config_snapshot(cfg).dump())); }

} // namespace texmine

#endif // TEXMINE_CONFIG_HPP
