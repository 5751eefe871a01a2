#ifndef TEXMINE_PBR_HPP
#define TEXMINE_PBR_HPP

// Seeded synthesis of PBR map sets from texture crops: every scalar material
// property is driven by a randomly chosen image channel (or a constant),
// passed through a short random augmentation chain. Normals come from the
// height map. Two materials can be blended property by property.

#include "texmine/detector.hpp"
#include "texmine/raster.hpp"
#include "texmine/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace texmine {

enum class Property { albedo = 0, roughness, metallic, height, transmission };

inline constexpr std::array<Property, 5> kAllProperties = {Property::albedo, Property::roughness, Property::metallic,
                                                           Property::height, Property::transmission};
inline constexpr std::array<Property, 4> kScalarProperties = {Property::roughness, Property::metallic,
                                                              Property::height, Property::transmission};

inline constexpr std::string_view property_name(Property p) {
    constexpr std::array<std::string_view, 5> names = {"albedo", "roughness", "metallic", "height", "transmission"};
    return names[static_cast<int>(p)];
}

enum class SourceKind { R, G, B, H, S, V, RGB, Uniform };

inline constexpr std::string_view source_name(SourceKind k) {
    constexpr std::array<std::string_view, 8> names = {"R", "G", "B", "H", "S", "V", "RGB", "Uniform"};
    return names[static_cast<int>(k)];
}

/// Image channel feeding a map. `value` is used only by Uniform.
struct SourceChannel {
    SourceKind kind = SourceKind::R;
    double value = 0.0;

    bool operator==(const SourceChannel&) const = default;
};

namespace aug {
struct Scale { double factor = 1.0; bool operator==(const Scale&) const = default; };
struct Offset { double delta = 0.0; bool operator==(const Offset&) const = default; };
struct Invert { bool operator==(const Invert&) const = default; };
struct SoftThreshold { double threshold = 0.5; double softness = 0.1; bool operator==(const SoftThreshold&) const = default; };
struct HardThreshold { double threshold = 0.5; bool operator==(const HardThreshold&) const = default; };
struct ColorRamp {
    std::vector<std::array<double, 2>> points; ///< (x, y), x ascending
    bool operator==(const ColorRamp&) const = default;
};
} // namespace aug

using Augmentation = std::variant<aug::Scale, aug::Offset, aug::Invert, aug::SoftThreshold, aug::HardThreshold,
                                  aug::ColorRamp>;

struct MapRecipe {
    Property property = Property::roughness;
    SourceChannel source;
    std::vector<Augmentation> chain;
    std::optional<double> hue_rotation; ///< albedo only, in turns

    bool operator==(const MapRecipe&) const = default;
};

struct RecipeSet {
    std::array<MapRecipe, 5> maps; ///< indexed by Property
    double normal_strength = 1.0;

    MapRecipe& operator[](Property p) { return maps[static_cast<int>(p)]; }
    const MapRecipe& operator[](Property p) const { return maps[static_cast<int>(p)]; }
    bool operator==(const RecipeSet&) const = default;
};

/// Sampling probabilities and parameter ranges.
struct SynthParams {
    double p_uniform = 0.2;
    double p_augment = 0.25;
    double p_hue_rotation = 0.1;
    double p_per_property_mix = 0.5;
    double scale_min = 0.25, scale_max = 2.5;
    double offset_min = -0.3, offset_max = 0.3;
    double threshold_min = 0.2, threshold_max = 0.8;
    double softness_min = 0.05, softness_max = 0.2;
    double strength_min = 0.5, strength_max = 8.0;
    int max_chain = 3;

    bool operator==(const SynthParams&) const = default;
};

enum class MixMode { per_property, global };

struct MixSpec {
    MixMode mode = MixMode::global;
    std::array<double, 5> ratios{}; ///< indexed by Property; all equal in global mode

    double ratio(Property p) const { return ratios[static_cast<int>(p)]; }

    static MixSpec uniform(double r) {
        MixSpec s;
        s.ratios.fill(r);
        return s;
    }
    bool operator==(const MixSpec&) const = default;
};

struct MixProvenance {
    std::string a_id;
    std::string b_id;
    MixSpec spec;
    bool operator==(const MixProvenance&) const = default;
};

struct PBRMaterial {
    std::string material_id;
    std::string texture_id;
    std::uint64_t seed = 0;
    Raster albedo;
    Raster roughness;
    Raster metallic;
    Raster height;
    Raster normal; ///< tangent space, encoded n*0.5+0.5
    Raster transmission;
    double normal_strength = 1.0;
    RecipeSet recipes;
    std::optional<MixProvenance> mix;

    const Raster& map(Property p) const {
        switch (p) {
        case Property::albedo: return albedo;
        case Property::roughness: return roughness;
        case Property::metallic: return metallic;
        case Property::height: return height;
        default: return transmission;
        }
    }
    Raster& map(Property p) { return const_cast<Raster&>(std::as_const(*this).map(p)); }
};

inline std::string texture_id(const std::string& source_id, const PixelRect& rect) {
    return source_id + "-x" + std::to_string(rect.x) + "-y" + std::to_string(rect.y) + "-s" + std::to_string(rect.w);
}

inline std::string texture_id(const TextureCrop& crop) { return texture_id(crop.source_id, crop.rect); }

inline std::string material_id(const std::string& texture_id, std::uint64_t seed) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(seed));
    return texture_id + "-m" + buf;
}

inline RecipeSet sample_recipes(std::uint64_t seed, std::string_view crop_id, const SynthParams& sp = {}) {
    Rng rng(derive_seed(seed, crop_id));
    RecipeSet set;

    MapRecipe& albedo = set[Property::albedo];
    albedo.property = Property::albedo;
    albedo.source = {SourceKind::RGB, 0.0};
    if (rng.chance(sp.p_hue_rotation))
        albedo.hue_rotation = rng.uniform();

    for (Property p : kScalarProperties) {
        MapRecipe& r = set[p];
        r.property = p;
        if (rng.chance(sp.p_uniform)) {
            r.source = {SourceKind::Uniform, rng.uniform()};
            continue; // a constant map has nothing to augment
        }
        r.source = {static_cast<SourceKind>(rng.index(6)), 0.0};

        if (rng.chance(sp.p_augment))
            r.chain.emplace_back(aug::Invert{});
        if (rng.chance(sp.p_augment))
            r.chain.emplace_back(aug::Scale{rng.uniform(sp.scale_min, sp.scale_max)});
        if (rng.chance(sp.p_augment))
            r.chain.emplace_back(aug::Offset{rng.uniform(sp.offset_min, sp.offset_max)});
        if (rng.chance(sp.p_augment)) {
            Augmentation last;
            switch (rng.index(3)) {
            case 0: {
                const double t = rng.uniform(sp.threshold_min, sp.threshold_max);
                last = aug::SoftThreshold{t, rng.uniform(sp.softness_min, sp.softness_max)};
                break;
            }
            case 1:
                last = aug::HardThreshold{rng.uniform(sp.threshold_min, sp.threshold_max)};
                break;
            default: {
                std::array<double, 3> xs{rng.uniform(), rng.uniform(), rng.uniform()};
                std::sort(xs.begin(), xs.end());
                aug::ColorRamp ramp;
                for (double x : xs)
                    ramp.points.push_back({x, rng.uniform()});
                last = std::move(ramp);
                break;
            }
            }
            if (static_cast<int>(r.chain.size()) < sp.max_chain)
                r.chain.push_back(std::move(last));
        }
    }
    set.normal_strength = rng.uniform(sp.strength_min, sp.strength_max);
    return set;
}

inline double apply_augmentation(double v, const Augmentation& a) {
    const double out = std::visit(
        [v](const auto& op) -> double {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, aug::Scale>) {
                return v * op.factor;
            } else if constexpr (std::is_same_v<T, aug::Offset>) {
                return v + op.delta;
            } else if constexpr (std::is_same_v<T, aug::Invert>) {
                return 1.0 - v;
            } else if constexpr (std::is_same_v<T, aug::HardThreshold>) {
                return v >= op.threshold ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, aug::SoftThreshold>) {
                const double lo = op.threshold - op.softness;
                const double width = 2.0 * op.softness;
                if (width <= 0.0)
                    return v >= op.threshold ? 1.0 : 0.0;
                const double x = std::clamp((v - lo) / width, 0.0, 1.0);
                return x * x * (3.0 - 2.0 * x);
            } else {
                const auto& pts = op.points;
                if (pts.empty())
                    return v;
                if (v <= pts.front()[0])
                    return pts.front()[1];
                if (v >= pts.back()[0])
                    return pts.back()[1];
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    if (v <= pts[i][0]) {
                        const double span = pts[i][0] - pts[i - 1][0];
                        if (span <= 0.0)
                            return pts[i][1];
                        const double t = (v - pts[i - 1][0]) / span;
                        return pts[i - 1][1] + t * (pts[i][1] - pts[i - 1][1]);
                    }
                }
                return pts.back()[1];
            }
        },
        a);
    return clamp01(out);
}

inline Raster apply_augmentation(const Raster& map, const Augmentation& a) {
    if (map.channels() != 1)
        throw InvalidArgument("augmentations apply to single-channel maps");
    Raster out = map;
    for (float& v : out.data())
        v = static_cast<float>(apply_augmentation(static_cast<double>(v), a));
    return out;
}

inline Raster source_map(const Raster& rgb, const SourceChannel& src) {
    switch (src.kind) {
    case SourceKind::R: return extract_channel(rgb, 0);
    case SourceKind::G: return extract_channel(rgb, 1);
    case SourceKind::B: return extract_channel(rgb, 2);
    case SourceKind::H: return rgb_to_hsv(rgb).h;
    case SourceKind::S: return rgb_to_hsv(rgb).s;
    case SourceKind::V: return rgb_to_hsv(rgb).v;
    case SourceKind::Uniform:
        return Raster(rgb.width(), rgb.height(), 1, static_cast<float>(clamp01(src.value)));
    case SourceKind::RGB: break;
    }
    throw InvalidArgument("RGB source is not a single channel");
}

/// Builds the map a recipe describes from an RGB crop.
inline Raster realize_map(const Raster& crop_rgb, const MapRecipe& recipe) {
    if (crop_rgb.channels() != 3)
        throw InvalidArgument("realize_map requires a 3-channel crop");
    if (recipe.property == Property::albedo) {
        if (recipe.source.kind != SourceKind::RGB)
            throw InvalidArgument("albedo recipes must use the RGB source");
        return recipe.hue_rotation ? rotate_hue(crop_rgb, *recipe.hue_rotation) : crop_rgb;
    }
    if (recipe.source.kind == SourceKind::RGB)
        throw InvalidArgument("scalar maps need a single-channel source");
    if (static_cast<int>(recipe.chain.size()) > 3)
        throw InvalidArgument("augmentation chain longer than 3");
    Raster m = source_map(crop_rgb, recipe.source);
    for (const auto& a : recipe.chain)
        m = apply_augmentation(m, a);
    return m;
}

inline Raster realize_map(const TextureCrop& crop, const MapRecipe& recipe) { return realize_map(crop.raster, recipe); }

/// Tangent-space normals from central differences of the height map
/// (edge-replicated borders), encoded as (n+1)/2.
inline Raster height_to_normal(const Raster& height, double strength) {
    if (height.channels() != 1)
        throw InvalidArgument("height_to_normal requires a single-channel height map");
    if (!std::isfinite(strength))
        throw InvalidArgument("normal strength must be finite");
    Raster out(height.width(), height.height(), 3);
    for (int y = 0; y < height.height(); ++y) {
        for (int x = 0; x < height.width(); ++x) {
            const double gx = 0.5 * (static_cast<double>(height.clamped(x + 1, y)) - height.clamped(x - 1, y));
            const double gy = 0.5 * (static_cast<double>(height.clamped(x, y + 1)) - height.clamped(x, y - 1));
            const double nx = -strength * gx;
            const double ny = -strength * gy;
            const double inv_len = 1.0 / std::sqrt(nx * nx + ny * ny + 1.0);
            out.at(x, y, 0) = static_cast<float>((nx * inv_len + 1.0) * 0.5);
            out.at(x, y, 1) = static_cast<float>((ny * inv_len + 1.0) * 0.5);
            out.at(x, y, 2) = static_cast<float>((inv_len + 1.0) * 0.5);
        }
    }
    return out;
}

/// Realizes every map of a recipe set against one crop.
inline PBRMaterial realize_material(const Raster& crop_rgb, const RecipeSet& recipes) {
    PBRMaterial m;
    m.recipes = recipes;
    m.normal_strength = recipes.normal_strength;
    for (Property p : kAllProperties)
        m.map(p) = realize_map(crop_rgb, recipes[p]);
    m.normal = height_to_normal(m.height, m.normal_strength);
    return m;
}

inline PBRMaterial generate_material(const TextureCrop& crop, std::uint64_t seed, const SynthParams& sp = {}) {
    if (crop.raster.channels() != 3)
        throw InvalidArgument("generate_material requires a 3-channel crop");
    const std::string tid = texture_id(crop);
    PBRMaterial m = realize_material(crop.raster, sample_recipes(seed, tid, sp));
    m.texture_id = tid;
    m.seed = seed;
    m.material_id = material_id(tid, seed);
    return m;
}

inline MixSpec sample_mix_spec(std::uint64_t seed, const SynthParams& sp = {}) {
    Rng rng(derive_seed(seed, "mix-spec"));
    MixSpec spec;
    if (rng.chance(sp.p_per_property_mix)) {
        spec.mode = MixMode::per_property;
        for (double& r : spec.ratios)
            r = rng.uniform();
    } else {
        spec.mode = MixMode::global;
        spec.ratios.fill(rng.uniform());
    }
    return spec;
}

namespace detail {
inline Raster blend(const Raster& a, const Raster& b, double r) {
    const Raster& bb = (b.width() == a.width() && b.height() == a.height()) ? b
                                                                            : resample_bilinear(b, a.width(), a.height());
    if (bb.channels() != a.channels())
        throw ShapeMismatch("cannot blend maps with different channel counts");
    Raster out(a.width(), a.height(), a.channels());
    auto pa = a.data();
    auto pb = bb.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i)
        po[i] = static_cast<float>(clamp01((1.0 - r) * pa[i] + r * pb[i]));
    return out;
}
} // namespace detail

/// Per-property weighted average (1-r)*a + r*b; b is resampled to a's size.
/// The normal map is re-derived from the blended height with a's strength.
inline PBRMaterial mix_materials(const PBRMaterial& a, const PBRMaterial& b, const MixSpec& spec) {
    for (double r : spec.ratios)
        if (!(r >= 0.0 && r <= 1.0))
            throw InvalidArgument("mix ratios must lie in [0, 1]");
    PBRMaterial out;
    out.texture_id = a.texture_id;
    out.seed = a.seed;
    out.recipes = a.recipes;
    out.normal_strength = a.normal_strength;
    for (Property p : kAllProperties)
        out.map(p) = detail::blend(a.map(p), b.map(p), spec.ratio(p));
    out.normal = height_to_normal(out.height, out.normal_strength);
    out.mix = MixProvenance{a.material_id, b.material_id, spec};
    return out;
}

} // namespace texmine

#endif // TEXMINE_PBR_HPP
