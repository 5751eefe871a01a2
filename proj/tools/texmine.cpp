#include "texmine/config.hpp"
#include "texmine/contact_sheet.hpp"
#include "texmine/pipeline.hpp"
#include "texmine/service.hpp"
#include "texmine/stats.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace texmine;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<std::string> input;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> cell_size;
    std::optional<int> bins;
    std::optional<double> threshold;
    std::optional<int> min_cells;
    std::optional<int> max_cells;
    std::optional<int> resize;
    std::optional<int> jobs;
    std::optional<int> mixes;
    bool no_pbr = false;
};

PipelineConfig resolve_config(const CommonOptions& o) {
    PipelineConfig cfg;
    if (!o.config_path.empty())
        cfg = load_config_file(o.config_path, cfg);
    if (o.input) cfg.input_dir = *o.input;
    if (o.out_dir) cfg.output_dir = *o.out_dir;
    if (o.seed) cfg.seed = *o.seed;
    if (o.cell_size) cfg.grid.cell_px = *o.cell_size;
    if (o.bins) cfg.grid.bins = *o.bins;
    if (o.threshold) cfg.detect.threshold = *o.threshold;
    if (o.min_cells) cfg.detect.min_cells = *o.min_cells;
    if (o.max_cells) cfg.detect.max_cells = *o.max_cells;
    if (o.resize) cfg.resize_long_edge = *o.resize;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.mixes) cfg.mixes_per_material = *o.mixes;
    if (o.no_pbr) cfg.generate_pbr = false;
    cfg.validate();
    return cfg;
}

void add_config_option(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "TOML configuration file")->check(CLI::ExistingFile);
}

void add_dir_option(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--dir", o.out_dir, "Output directory of a previous extract run");
}

int run_extract(const CommonOptions& o) {
    const PipelineConfig cfg = resolve_config(o);
    const auto manifest = scan_corpus(cfg, [](const std::string& msg) { std::cerr << "texmine: " << msg << "\n"; });
    const auto& counts = manifest.at("counts");
    std::cout << "images " << counts.at("images") << ", skipped " << counts.at("skipped") << ", textures "
              << counts.at("textures") << ", materials " << counts.at("materials") << "\n";
    std::cout << "manifest: " << (cfg.output_dir / kManifestFile).string() << "\n";
    return kExitOk;
}

int run_material(const CommonOptions& o, const std::string& texture, bool all) {
    const PipelineConfig cfg = resolve_config(o);
    if (texture.empty() == !all)
        throw InvalidArgument("pass exactly one of --texture ID or --all");
    auto manifest = load_manifest(cfg.output_dir);
    std::vector<nlohmann::json> targets;
    for (const auto& t : manifest.at("textures"))
        if (all || t.at("texture_id") == texture)
            targets.push_back(t);
    if (!all && targets.empty())
        throw InvalidArgument("unknown texture: " + texture);

    std::vector<nlohmann::json> entries(targets.size());
    parallel_for(targets.size(), cfg.jobs, [&](std::size_t i) {
        const TextureCrop crop = load_texture(cfg.output_dir, targets[i]);
        const PBRMaterial m = generate_material(crop, cfg.seed, cfg.synth);
        write_material(m, cfg.output_dir / kMaterialsDir);
        entries[i] = material_entry(m);
    });
    for (auto& e : entries) {
        std::cout << e.at("material_id").get<std::string>() << "\n";
        upsert_material(manifest, std::move(e));
    }
    save_manifest(cfg.output_dir, manifest);
    return kExitOk;
}

int run_mix(const CommonOptions& o, const std::string& a, const std::string& b) {
    const PipelineConfig cfg = resolve_config(o);
    auto manifest = load_manifest(cfg.output_dir);
    const PBRMaterial m = make_mix(cfg.output_dir, manifest, a, b, cfg.seed, cfg.synth);
    write_material(m, cfg.output_dir / kMaterialsDir);
    upsert_material(manifest, material_entry(m));
    save_manifest(cfg.output_dir, manifest);
    std::cout << m.material_id << "\n";
    return kExitOk;
}

int run_sheet(const CommonOptions& o, const std::string& out_png, int columns, int tile, bool materials) {
    const PipelineConfig cfg = resolve_config(o);
    const auto manifest = load_manifest(cfg.output_dir);
    Raster sheet;
    if (materials) {
        std::vector<PBRMaterial> items;
        for (const auto& m : manifest.at("materials"))
            items.push_back(load_material(cfg.output_dir, manifest, m.at("material_id")));
        sheet = material_sheet(items, tile);
    } else {
        std::vector<Raster> items;
        for (const auto& t : manifest.at("textures"))
            items.push_back(read_image(cfg.output_dir / t.at("file").get<std::string>()));
        sheet = contact_sheet(items, columns, tile);
    }
    write_png(out_png, sheet);
    std::cout << out_png << " (" << sheet.width() << "x" << sheet.height() << ")\n";
    return kExitOk;
}

int run_stats(const CommonOptions& o, bool as_json) {
    const PipelineConfig cfg = resolve_config(o);
    const StatsReport report = compute_stats(load_manifest(cfg.output_dir));
    if (as_json)
        std::cout << stats_to_json(report).dump(2) << "\n";
    else
        std::cout << stats_to_text(report);
    return kExitOk;
}

TuningService* g_service = nullptr;

int run_serve(const CommonOptions& o, const std::string& host, int port, const std::string& ui_dir) {
    const PipelineConfig cfg = resolve_config(o);
    TuningService service(cfg);
    if (!ui_dir.empty() && !service.mount_ui(ui_dir))
        throw InvalidArgument("cannot serve UI from " + ui_dir);
    g_service = &service;
    std::signal(SIGINT, [](int) { if (g_service) g_service->stop(); });
    std::signal(SIGTERM, [](int) { if (g_service) g_service->stop(); });
    std::cout << "texmine: serving " << cfg.input_dir.string() << " on http://" << host << ":" << port << "\n"
              << std::flush;
    service.serve(host, port);
    g_service = nullptr;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"texmine: mine uniform textures from photographs and synthesize PBR materials"};
    app.require_subcommand(1);
    CommonOptions o;

    auto* extract = app.add_subcommand("extract", "Scan a corpus, crop uniform textures, synthesize materials");
    add_config_option(extract, o);
    extract->add_option("--input", o.input, "Input image directory");
    extract->add_option("--out", o.out_dir, "Output directory");
    extract->add_option("--seed", o.seed, "Global seed");
    extract->add_option("--cell-size", o.cell_size, "Grid cell size in pixels");
    extract->add_option("--bins", o.bins, "Histogram bins per feature channel");
    extract->add_option("--threshold", o.threshold, "Jensen-Shannon distance threshold");
    extract->add_option("--min-cells", o.min_cells, "Minimum region side in cells");
    extract->add_option("--max-cells", o.max_cells, "Maximum region side in cells");
    extract->add_option("--resize", o.resize, "Longest image edge after resizing");
    extract->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
    extract->add_option("--mixes", o.mixes, "Mixed materials generated per material");
    extract->add_flag("--no-pbr", o.no_pbr, "Only extract textures");

    std::string texture;
    bool all = false;
    auto* material = app.add_subcommand("material", "Generate materials for extracted textures");
    add_config_option(material, o);
    add_dir_option(material, o);
    auto* tex_opt = material->add_option("--texture", texture, "Texture id");
    material->add_flag("--all", all, "Every texture in the manifest")->excludes(tex_opt);
    material->add_option("--seed", o.seed, "Seed");
    material->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");

    std::string mix_a, mix_b;
    auto* mix = app.add_subcommand("mix", "Blend two materials");
    add_config_option(mix, o);
    add_dir_option(mix, o);
    mix->add_option("--a", mix_a, "First material id")->required();
    mix->add_option("--b", mix_b, "Second material id")->required();
    mix->add_option("--seed", o.seed, "Seed of the mixing ratios");

    std::string sheet_out;
    int columns = 4;
    int tile = 128;
    bool sheet_materials = false;
    auto* sheet = app.add_subcommand("sheet", "Write a contact sheet of textures or materials");
    add_config_option(sheet, o);
    add_dir_option(sheet, o);
    sheet->add_option("--out", sheet_out, "Output PNG")->required();
    sheet->add_option("--columns", columns, "Tiles per row")->check(CLI::PositiveNumber);
    sheet->add_option("--tile", tile, "Tile size in pixels")->check(CLI::PositiveNumber);
    sheet->add_flag("--materials", sheet_materials, "One row of maps per material");

    bool stats_json = false;
    auto* stats = app.add_subcommand("stats", "Summarize a manifest");
    add_config_option(stats, o);
    add_dir_option(stats, o);
    stats->add_flag("--json", stats_json, "Emit JSON");

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string ui_dir;
    auto* serve = app.add_subcommand("serve", "Run the HTTP tuning service");
    add_config_option(serve, o);
    serve->add_option("--input", o.input, "Input image directory");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--ui", ui_dir, "Directory of static UI files")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*extract) return run_extract(o);
        if (*material) return run_material(o, texture, all);
        if (*mix) return run_mix(o, mix_a, mix_b);
        if (*sheet) return run_sheet(o, sheet_out, columns, tile, sheet_materials);
        if (*stats) return run_stats(o, stats_json);
        if (*serve) return run_serve(o, host, port, ui_dir);
    } catch (const InvalidArgument& e) {
        std::cerr << "texmine: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EmptyInput& e) {
        std::cerr << "texmine: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "texmine: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
