#ifndef TEXMINE_PIPELINE_HPP
#define TEXMINE_PIPELINE_HPP

// Corpus scanning: decode -> resize -> detect -> crop -> synthesize, with
// all assets and a manifest.json written under the output directory.
//
// Output layout:
//   <out>/manifest.json
//   <out>/textures/<texture_id>.png
//   <out>/materials/<material_id>/{albedo,roughness,metallic,height,normal,transmission}.png
//   <out>/materials/<material_id>/material.json

#include "texmine/config.hpp"
#include "texmine/detector.hpp"
#include "texmine/image_io.hpp"
#include "texmine/parallel.hpp"
#include "texmine/pbr.hpp"
#include "texmine/recipe_json.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace texmine {

namespace fs = std::filesystem;

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTexturesDir = "textures";
inline constexpr const char* kMaterialsDir = "materials";

inline bool is_supported_image(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

/// Supported images below `dir`, as generic relative paths in lexicographic order.
inline std::vector<std::string> enumerate_images(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw InputDirMissing("input directory does not exist: " + dir.string());
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied)) {
        if (entry.is_regular_file() && is_supported_image(entry.path()))
            out.push_back(fs::relative(entry.path(), dir).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// File-name-safe identifier of a source image, unique per relative path.
inline std::string source_id_for(const std::string& rel_path) {
    std::string stem;
    for (char c : rel_path)
        stem.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
    return stem + "-" + hex64(fnv1a64(rel_path)).substr(0, 8);
}

inline Raster load_prepared_image(const fs::path& path, int resize_long_edge) {
    return resize_longest_edge(read_image(path), resize_long_edge);
}

struct MaterialFiles {
    fs::path dir;
    std::map<std::string, fs::path> maps; ///< map name -> file
    fs::path sidecar;
};

/// Writes the six maps and material.json under out_dir/<material_id>/.
inline MaterialFiles write_material(const PBRMaterial& m, const fs::path& out_dir) {
    MaterialFiles files;
    files.dir = out_dir / m.material_id;
    std::error_code ec;
    fs::create_directories(files.dir, ec);
    if (ec)
        throw IoError("cannot create " + files.dir.string() + ": " + ec.message());

    auto put = [&](const std::string& name, const Raster& r, PngDepth depth) {
        const fs::path p = files.dir / (name + ".png");
        write_png(p, r, depth);
        files.maps[name] = p;
    };
    put("albedo", m.albedo, PngDepth::k8);
    put("roughness", m.roughness, PngDepth::k8);
    put("metallic", m.metallic, PngDepth::k8);
    put("height", m.height, PngDepth::k16);
    put("normal", m.normal, PngDepth::k8);
    put("transmission", m.transmission, PngDepth::k8);

    files.sidecar = files.dir / "material.json";
    std::ofstream js(files.sidecar, std::ios::trunc);
    if (!js)
        throw IoError("cannot write " + files.sidecar.string());
    js << material_to_json(m).dump(2) << "\n";
    if (!js)
        throw IoError("short write to " + files.sidecar.string());
    return files;
}

inline const std::vector<std::string>& material_file_names() {
    static const std::vector<std::string> names = {"albedo", "roughness", "metallic", "height", "normal", "transmission"};
    return names;
}

inline nlohmann::json material_entry(const PBRMaterial& m) {
    nlohmann::json files = nlohmann::json::object();
    const std::string base = std::string(kMaterialsDir) + "/" + m.material_id + "/";
    for (const auto& n : material_file_names())
        files[n] = base + n + ".png";
    files["material_json"] = base + "material.json";
    nlohmann::json j = material_to_json(m);
    j["files"] = std::move(files);
    return j;
}

inline nlohmann::json texture_entry(const TextureCrop& crop, const std::string& source_image, int cell_px) {
    const std::string tid = texture_id(crop);
    return {
        {"texture_id", tid},
        {"source_id", crop.source_id},
        {"source_image", source_image},
        {"file", std::string(kTexturesDir) + "/" + tid + ".png"},
        {"rect", {{"x", crop.rect.x}, {"y", crop.rect.y}, {"w", crop.rect.w}, {"h", crop.rect.h}}},
        {"grid",
         {{"cell_px", cell_px},
          {"cell_x", crop.rect.x / cell_px},
          {"cell_y", crop.rect.y / cell_px},
          {"side", crop.rect.w / cell_px}}},
        {"max_pair_distance", crop.max_pair_distance},
    };
}

struct ImageResult {
    std::string rel_path;
    std::optional<std::string> error;
    nlohmann::json image;
    std::vector<nlohmann::json> textures;
    std::vector<nlohmann::json> materials;
};

/// Runs the whole per-image chain and writes that image's assets.
inline ImageResult process_image(const PipelineConfig& cfg, const std::string& rel_path) {
    ImageResult res;
    res.rel_path = rel_path;
    Raster original;
    try {
        original = read_image(cfg.input_dir / rel_path);
    } catch (const Error& e) {
        res.error = e.what();
        return res;
    }
    const Raster image = resize_longest_edge(original, cfg.resize_long_edge);
    const std::string sid = source_id_for(rel_path);
    auto crops = detect_textures(image, cfg.grid, cfg.detect, cfg.bounds(), sid);

    res.image = {{"path", rel_path},
                 {"source_id", sid},
                 {"width", original.width()},
                 {"height", original.height()},
                 {"resized_width", image.width()},
                 {"resized_height", image.height()},
                 {"textures", crops.size()}};

    for (auto& crop : crops) {
        // Materials are built from exactly the pixels stored on disk.
        crop.raster = quantize_8bit(crop.raster);
        const std::string tid = texture_id(crop);
        write_png(cfg.output_dir / kTexturesDir / (tid + ".png"), crop.raster);
        res.textures.push_back(texture_entry(crop, rel_path, cfg.grid.cell_px));
        if (cfg.generate_pbr) {
            const PBRMaterial m = generate_material(crop, cfg.seed, cfg.synth);
            write_material(m, cfg.output_dir / kMaterialsDir);
            res.materials.push_back(material_entry(m));
        }
    }
    return res;
}

inline nlohmann::json manifest_counts(const nlohmann::json& manifest) {
    return {{"images", manifest.at("images").size()},
            {"skipped", manifest.at("skipped").size()},
            {"textures", manifest.at("textures").size()},
            {"materials", manifest.at("materials").size()}};
}

inline void save_manifest(const fs::path& out_dir, nlohmann::json& manifest) {
    manifest["counts"] = manifest_counts(manifest);
    const fs::path path = out_dir / kManifestFile;
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw OutputNotWritable("cannot write " + path.string());
    out << manifest.dump(2) << "\n";
    if (!out)
        throw OutputNotWritable("short write to " + path.string());
}

inline nlohmann::json load_manifest(const fs::path& out_dir) {
    const fs::path path = out_dir / kManifestFile;
    std::ifstream in(path);
    if (!in)
        throw ManifestInvalid("cannot read " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ManifestInvalid(path.string() + " is not valid JSON");
    for (const char* key : {"config", "images", "skipped", "textures", "materials"})
        if (!j.contains(key))
            throw ManifestInvalid(std::string("manifest lacks '") + key + "'");
    for (const char* key : {"images", "skipped", "textures", "materials"})
        if (!j.at(key).is_array())
            throw ManifestInvalid(std::string("manifest '") + key + "' is not an array");
    return j;
}

inline const nlohmann::json* find_entry(const nlohmann::json& list, const char* key, const std::string& id) {
    for (const auto& e : list)
        if (e.value(key, std::string()) == id)
            return &e;
    return nullptr;
}

/// Inserts or replaces (by material_id) a material entry.
inline void upsert_material(nlohmann::json& manifest, nlohmann::json entry) {
    auto& list = manifest["materials"];
    const std::string id = entry.at("material_id");
    for (auto& e : list) {
        if (e.value("material_id", std::string()) == id) {
            e = std::move(entry);
            return;
        }
    }
    list.push_back(std::move(entry));
}

inline TextureCrop load_texture(const fs::path& out_dir, const nlohmann::json& entry) {
    TextureCrop crop;
    crop.source_id = entry.at("source_id").get<std::string>();
    const auto& r = entry.at("rect");
    crop.rect = {r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
    crop.max_pair_distance = entry.at("max_pair_distance").get<double>();
    crop.raster = read_image(out_dir / entry.at("file").get<std::string>());
    return crop;
}

/// Rebuilds a material's maps from its manifest entry and the stored crops.
inline PBRMaterial load_material(const fs::path& out_dir, const nlohmann::json& manifest, const std::string& id) {
    const nlohmann::json* entry = find_entry(manifest.at("materials"), "material_id", id);
    if (!entry)
        throw InvalidArgument("unknown material: " + id);
    if (entry->contains("mix")) {
        const auto& mix = entry->at("mix");
        PBRMaterial m = mix_materials(load_material(out_dir, manifest, mix.at("a").get<std::string>()),
                                      load_material(out_dir, manifest, mix.at("b").get<std::string>()),
                                      mix_spec_from_json(mix.at("spec")));
        m.material_id = id;
        return m;
    }
    const std::string tid = entry->at("texture_id").get<std::string>();
    const nlohmann::json* tex = find_entry(manifest.at("textures"), "texture_id", tid);
    if (!tex)
        throw ManifestInvalid("material " + id + " references unknown texture " + tid);
    const TextureCrop crop = load_texture(out_dir, *tex);
    PBRMaterial m = realize_material(crop.raster, recipes_from_json(entry->at("recipes")));
    m.material_id = id;
    m.texture_id = tid;
    m.seed = entry->at("seed").get<std::uint64_t>();
    return m;
}

inline std::string mix_id(const std::string& a, const std::string& b, std::uint64_t seed) {
    return "mix-" + hex64(fnv1a64(a + "|" + b + "|" + hex64(seed)));
}

/// Mixes two manifest materials and writes the result.
inline PBRMaterial make_mix(const fs::path& out_dir, const nlohmann::json& manifest, const std::string& a_id,
                            const std::string& b_id, std::uint64_t seed, const SynthParams& sp = {}) {
    const PBRMaterial a = load_material(out_dir, manifest, a_id);
    const PBRMaterial b = load_material(out_dir, manifest, b_id);
    PBRMaterial m = mix_materials(a, b, sample_mix_spec(derive_seed(seed, a_id + "|" + b_id), sp));
    m.seed = seed;
    m.material_id = mix_id(a_id, b_id, seed);
    return m;
}

inline void reset_output_dir(const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw OutputNotWritable("cannot create output directory " + out_dir.string());
    // Assets from an earlier run would not be referenced by the new manifest.
    fs::remove_all(out_dir / kTexturesDir, ec);
    fs::remove_all(out_dir / kMaterialsDir, ec);
    fs::create_directories(out_dir / kTexturesDir, ec);
    fs::create_directories(out_dir / kMaterialsDir, ec);
    if (ec)
        throw OutputNotWritable("cannot prepare " + out_dir.string() + ": " + ec.message());
}

using LogFn = std::function<void(const std::string&)>;

inline nlohmann::json scan_corpus(const PipelineConfig& cfg, const LogFn& log = {}) {
    cfg.validate();
    const auto images = enumerate_images(cfg.input_dir);
    reset_output_dir(cfg.output_dir);

    std::vector<ImageResult> results(images.size());
    parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
        try {
            results[i] = process_image(cfg, images[i]);
        } catch (const std::exception& e) {
            results[i] = ImageResult{};
            results[i].rel_path = images[i];
            results[i].error = e.what();
        }
    });

    nlohmann::json manifest;
    manifest["format"] = "texmine-manifest/1";
    manifest["config"] = config_snapshot(cfg);
    manifest["config_hash"] = config_hash(cfg);
    manifest["images"] = nlohmann::json::array();
    manifest["skipped"] = nlohmann::json::array();
    manifest["textures"] = nlohmann::json::array();
    manifest["materials"] = nlohmann::json::array();
    for (auto& r : results) {
        if (r.error) {
            if (log)
                log("skipping " + r.rel_path + ": " + *r.error);
            manifest["skipped"].push_back({{"path", r.rel_path}, {"error", *r.error}});
            continue;
        }
        manifest["images"].push_back(std::move(r.image));
        for (auto& t : r.textures)
            manifest["textures"].push_back(std::move(t));
        for (auto& m : r.materials)
            manifest["materials"].push_back(std::move(m));
    }

    if (cfg.generate_pbr && cfg.mixes_per_material > 0 && manifest["materials"].size() >= 2) {
        std::vector<std::string> base_ids;
        for (const auto& m : manifest["materials"])
            base_ids.push_back(m.at("material_id"));
        const std::size_t n = base_ids.size();
        const std::size_t k = static_cast<std::size_t>(cfg.mixes_per_material);
        std::vector<nlohmann::json> mixes(n * k);
        std::vector<std::string> failures(n * k);
        parallel_for(n * k, cfg.jobs, [&](std::size_t idx) {
            const std::string& a = base_ids[idx / k];
            Rng pick(derive_seed(cfg.seed, a + "#mix" + std::to_string(idx % k)));
            std::size_t partner = static_cast<std::size_t>(pick.index(static_cast<int>(n - 1)));
            if (partner >= idx / k)
                ++partner;
            try {
                const PBRMaterial m = make_mix(cfg.output_dir, manifest, a, base_ids[partner],
                                               derive_seed(cfg.seed, a + "#mix" + std::to_string(idx % k)), cfg.synth);
                write_material(m, cfg.output_dir / kMaterialsDir);
                mixes[idx] = material_entry(m);
            } catch (const std::exception& e) {
                failures[idx] = "mix of " + a + " failed: " + e.what();
            }
        });
        for (std::size_t i = 0; i < mixes.size(); ++i) {
            if (!mixes[i].is_null())
                upsert_material(manifest, std::move(mixes[i]));
            else if (log)
                log(failures[i]);
        }
    }

    save_manifest(cfg.output_dir, manifest);
    return manifest;
}

} // namespace texmine

#endif // TEXMINE_PIPELINE_HPP
