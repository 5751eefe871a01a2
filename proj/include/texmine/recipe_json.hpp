#ifndef TEXMINE_RECIPE_JSON_HPP
#define TEXMINE_RECIPE_JSON_HPP

// JSON (de)serialization of recipes, mix specs and material sidecars.

#include "texmine/pbr.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace texmine {

using json = nlohmann::json;

namespace detail {

template <typename Enum, std::size_t N>
Enum enum_from_name(const std::string& name, const std::array<std::string_view, N>& names, const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == name)
            return static_cast<Enum>(i);
    throw InvalidArgument(std::string("unknown ") + what + ": " + name);
}

inline Property property_from_name(const std::string& s) {
    return enum_from_name<Property>(s, std::array<std::string_view, 5>{"albedo", "roughness", "metallic", "height",
                                                                       "transmission"},
                                    "property");
}

inline SourceKind source_from_name(const std::string& s) {
    return enum_from_name<SourceKind>(s, std::array<std::string_view, 8>{"R", "G", "B", "H", "S", "V", "RGB", "Uniform"},
                                      "source channel");
}

} // namespace detail

inline json augmentation_to_json(const Augmentation& a) {
    return std::visit(
        [](const auto& op) -> json {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, aug::Scale>)
                return {{"op", "scale"}, {"factor", op.factor}};
            else if constexpr (std::is_same_v<T, aug::Offset>)
                return {{"op", "offset"}, {"delta", op.delta}};
            else if constexpr (std::is_same_v<T, aug::Invert>)
                return {{"op", "invert"}};
            else if constexpr (std::is_same_v<T, aug::SoftThreshold>)
                return {{"op", "soft_threshold"}, {"threshold", op.threshold}, {"softness", op.softness}};
            else if constexpr (std::is_same_v<T, aug::HardThreshold>)
                return {{"op", "hard_threshold"}, {"threshold", op.threshold}};
            else
                return {{"op", "color_ramp"}, {"points", op.points}};
        },
        a);
}

inline Augmentation augmentation_from_json(const json& j) {
    const std::string op = j.at("op").get<std::string>();
    if (op == "scale")
        return aug::Scale{j.at("factor").get<double>()};
    if (op == "offset")
        return aug::Offset{j.at("delta").get<double>()};
    if (op == "invert")
        return aug::Invert{};
    if (op == "soft_threshold")
        return aug::SoftThreshold{j.at("threshold").get<double>(), j.at("softness").get<double>()};
    if (op == "hard_threshold")
        return aug::HardThreshold{j.at("threshold").get<double>()};
    if (op == "color_ramp")
        return aug::ColorRamp{j.at("points").get<std::vector<std::array<double, 2>>>()};
    throw InvalidArgument("unknown augmentation: " + op);
}

inline json recipe_to_json(const MapRecipe& r) {
    json j;
    j["property"] = std::string(property_name(r.property));
    j["source"] = std::string(source_name(r.source.kind));
    if (r.source.kind == SourceKind::Uniform)
        j["value"] = r.source.value;
    json chain = json::array();
    for (const auto& a : r.chain)
        chain.push_back(augmentation_to_json(a));
    j["chain"] = std::move(chain);
    if (r.hue_rotation)
        j["hue_rotation"] = *r.hue_rotation;
    return j;
}

inline MapRecipe recipe_from_json(const json& j) {
    MapRecipe r;
    r.property = detail::property_from_name(j.at("property").get<std::string>());
    r.source.kind = detail::source_from_name(j.at("source").get<std::string>());
    if (r.source.kind == SourceKind::Uniform)
        r.source.value = j.at("value").get<double>();
    for (const auto& a : j.at("chain"))
        r.chain.push_back(augmentation_from_json(a));
    if (j.contains("hue_rotation"))
        r.hue_rotation = j.at("hue_rotation").get<double>();
    return r;
}

inline json recipes_to_json(const RecipeSet& s) {
    json j = json::object();
    for (Property p : kAllProperties)
        j[std::string(property_name(p))] = recipe_to_json(s[p]);
    j["normal_strength"] = s.normal_strength;
    return j;
}

inline RecipeSet recipes_from_json(const json& j) {
    RecipeSet s;
    for (Property p : kAllProperties) {
        s[p] = recipe_from_json(j.at(std::string(property_name(p))));
        if (s[p].property != p)
            throw InvalidArgument("recipe property does not match its key");
    }
    s.normal_strength = j.at("normal_strength").get<double>();
    return s;
}

inline json mix_spec_to_json(const MixSpec& m) {
    json j;
    j["mode"] = m.mode == MixMode::per_property ? "per_property" : "global";
    if (m.mode == MixMode::global) {
        j["ratio"] = m.ratios[0];
    } else {
        json r = json::object();
        for (Property p : kAllProperties)
            r[std::string(property_name(p))] = m.ratio(p);
        j["ratios"] = std::move(r);
    }
    return j;
}

inline MixSpec mix_spec_from_json(const json& j) {
    MixSpec m;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "global") {
        m.mode = MixMode::global;
        m.ratios.fill(j.at("ratio").get<double>());
    } else if (mode == "per_property") {
        m.mode = MixMode::per_property;
        for (Property p : kAllProperties)
            m.ratios[static_cast<int>(p)] = j.at("ratios").at(std::string(property_name(p))).get<double>();
    } else {
        throw InvalidArgument("unknown mix mode: " + mode);
    }
    return m;
}

/// Contents of material.json.
inline json material_to_json(const PBRMaterial& m) {
    json j;
    j["material_id"] = m.material_id;
    j["texture_id"] = m.texture_id;
    j["seed"] = m.seed;
    j["normal_strength"] = m.normal_strength;
    j["recipes"] = recipes_to_json(m.recipes);
    if (m.mix) {
        j["mix"] = {{"a", m.mix->a_id}, {"b", m.mix->b_id}, {"spec", mix_spec_to_json(m.mix->spec)}};
    }
    return j;
}

} // namespace texmine

#endif // TEXMINE_RECIPE_JSON_HPP
