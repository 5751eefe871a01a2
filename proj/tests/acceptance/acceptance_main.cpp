// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include "texmine/pbr.hpp"
#include "texmine/pipeline.hpp"
#include "texmine/recipe_json.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace texmine;
using namespace texmine::testing;

namespace {

// Tolerances
constexpr double kWorkedValueTol = 1e-4;
constexpr double kTriangleTol = 1e-9;
constexpr double kUnitNormalTol = 1e-3;
constexpr double kRampNormalTol = 1e-4;
constexpr double kQuantStep = 1.0 / 255.0;
constexpr double kMosaicSeconds = 10.0;
constexpr double kCorpusSeconds = 300.0;
constexpr double kMosaicThreshold = 0.15;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + TEXMINE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome quadrant_mosaic_recovery() {
    TempDir in, out;
    constexpr int size = 1024, half = size / 2, cell = 40;
    write_image(in / "mosaic.png", quadrant_mosaic(size));

    const auto t0 = Clock::now();
    const int rc = run_cli("extract --input " + q(in.path()) + " --out " + q(out.path()) + " --jobs 1 --threshold " +
                           std::to_string(kMosaicThreshold));
    const double secs = seconds_since(t0);
    if (rc != 0)
        return {false, "texmine extract exited with " + std::to_string(rc)};

    const auto manifest = load_manifest(out.path());
    std::array<int, 4> per_quadrant{};
    int worst_cross = 0;
    for (const auto& t : manifest["textures"]) {
        const int x = t["rect"]["x"], y = t["rect"]["y"], w = t["rect"]["w"], h = t["rect"]["h"];
        ++per_quadrant[quadrant_of(x + w / 2, y + h / 2, size)];
        if (x < half && x + w > half)
            worst_cross = std::max(worst_cross, std::min(half - x, x + w - half));
        if (y < half && y + h > half)
            worst_cross = std::max(worst_cross, std::min(half - y, y + h - half));
        const std::string tid = t["texture_id"];
        bool has_material = false;
        for (const auto& m : manifest["materials"])
            has_material |= m["texture_id"] == tid && fs::exists(out / m["files"]["material_json"].get<std::string>());
        if (!has_material)
            return {false, "texture " + tid + " has no material bundle"};
    }
    const bool all_quadrants = std::all_of(per_quadrant.begin(), per_quadrant.end(), [](int n) { return n >= 1; });
    std::ostringstream d;
    d << "crops per quadrant " << per_quadrant[0] << "/" << per_quadrant[1] << "/" << per_quadrant[2] << "/"
      << per_quadrant[3] << ", worst boundary crossing " << worst_cross << " px (limit " << cell << "), "
      << fmt("%.2f s", secs) << " (limit " << kMosaicSeconds << " s), threshold " << kMosaicThreshold;
    return {all_quadrants && worst_cross <= cell && secs <= kMosaicSeconds, d.str()};
}

CellHistogram two_bin(std::array<double, 2> first, std::array<double, 2> rest) {
    CellHistogram h(kFeaturePlanes, 2);
    for (int c = 0; c < kFeaturePlanes; ++c) {
        const auto& src = c == 0 ? first : rest;
        h.channel(c)[0] = src[0];
        h.channel(c)[1] = src[1];
    }
    return h;
}

Outcome js_metric_suite() {
    Rng rng(20240601);
    int violations = 0;
    double worst_triangle = -1.0;
    for (int i = 0; i < 10000; ++i) {
        const double sparsity = (i % 4) * 0.25;
        const int bins = i % 2 ? 32 : 8;
        const auto a = random_histogram(rng, kFeaturePlanes, bins, sparsity);
        const auto b = random_histogram(rng, kFeaturePlanes, bins, sparsity);
        const auto c = random_histogram(rng, kFeaturePlanes, bins, sparsity);
        const double ab = js_distance(a, b), ba = js_distance(b, a), bc = js_distance(b, c), ac = js_distance(a, c);
        violations += ab != ba;
        violations += js_distance(a, a) != 0.0 || js_distance(b, b) != 0.0 || js_distance(c, c) != 0.0;
        for (double d : {ab, bc, ac})
            violations += d < 0.0 || d > 1.0;
        worst_triangle = std::max(worst_triangle, ac - (ab + bc));
        violations += ac > ab + bc + kTriangleTol;
    }

    const double disjoint = js_distance(two_bin({1, 0}, {0.3, 0.7}), two_bin({0, 1}, {0.3, 0.7}));
    const CellHistogram p = two_bin({1, 0}, {0.5, 0.5}), m = two_bin({0.5, 0.5}, {0.5, 0.5});
    const double jsd = js_divergence(p.channel(0), m.channel(0));
    const double half = js_distance(p, m);
    const bool worked = std::abs(disjoint - 0.1111) <= kWorkedValueTol && std::abs(jsd - 0.31128) <= kWorkedValueTol &&
                        std::abs(std::sqrt(jsd) - 0.5579) <= kWorkedValueTol &&
                        std::abs(half - 0.06199) <= kWorkedValueTol;
    std::ostringstream d;
    d << "10000 triples, " << violations << " axiom violations, max d(a,c)-d(a,b)-d(b,c) = " << worst_triangle
      << "; worked values " << fmt("%.5f", disjoint) << " " << fmt("%.5f", jsd) << " " << fmt("%.4f", std::sqrt(jsd))
      << " " << fmt("%.5f", half);
    return {violations == 0 && worked, d.str()};
}

Outcome brute_force_equivalence() {
    int mismatches = 0;
    std::size_t regions = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const GridStats g = patchy_grid(1000 + seed, 10, 10);
        DetectParams p;
        p.threshold = 0.06 + 0.02 * static_cast<double>(seed % 7);
        p.min_cells = 2 + static_cast<int>(seed % 3);
        p.max_cells = 10;
        const auto fast = find_uniform_regions(g, p);
        regions += fast.size();
        mismatches += !(fast == brute_force_regions(g, p));
    }
    return {mismatches == 0, "50 grids of 10x10, " + std::to_string(mismatches) + " mismatches, " +
                                 std::to_string(regions) + " candidates compared"};
}

void write_small_corpus(const TempDir& in) {
    write_image(in / "mosaic.png", quadrant_mosaic());
    write_image(in / "noise.png", noise_image(800, 600, 31, {0.5f, 0.4f, 0.3f}, 0.7f));
    write_image(in / "nested/blotch.png", blotch_image(700, 900, 32, {0.3f, 0.5f, 0.6f}, 0.7f, 2));
    write_image(in / "stripes.png", stripe_image(640, 640, 33, {0.1f, 0.2f, 0.1f}, {0.8f, 0.9f, 0.7f}, 10));
}

Outcome determinism() {
    TempDir in, out;
    write_small_corpus(in);
    std::string reference;
    std::vector<std::string> runs;
    int differing = 0;
    const std::vector<int> jobs = {1, 1, 1, 4, 16};
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const fs::path dir = out / ("run" + std::to_string(i));
        const int rc = run_cli("extract --input " + q(in.path()) + " --out " + q(dir) + " --seed 77 --mixes 1" +
                               " --threshold 0.15 --jobs " + std::to_string(jobs[i]));
        if (rc != 0)
            return {false, "extract failed with " + std::to_string(rc)};
        const std::string manifest = slurp(dir / kManifestFile);
        if (reference.empty())
            reference = manifest;
        else
            differing += manifest != reference;
    }
    const auto m = nlohmann::json::parse(reference);
    std::ostringstream d;
    d << "3 runs at jobs=1 plus jobs=4 and jobs=16: " << differing << " manifests differ ("
      << m["textures"].size() << " textures, " << m["materials"].size() << " materials, " << reference.size()
      << " bytes)";
    return {differing == 0 && !m["textures"].empty(), d.str()};
}

std::vector<TextureCrop> sweep_crops() {
    return {
        TextureCrop{"noise", PixelRect{0, 0, 96, 96}, quantize_8bit(noise_image(96, 96, 41, {0.4f, 0.5f, 0.6f}, 0.8f)), 0},
        TextureCrop{"blotch", PixelRect{0, 0, 96, 96},
                    quantize_8bit(blotch_image(96, 96, 42, {0.7f, 0.3f, 0.2f}, 0.8f, 2)), 0},
        TextureCrop{"stripes", PixelRect{0, 0, 96, 96},
                    quantize_8bit(stripe_image(96, 96, 43, {0.2f, 0.2f, 0.5f}, {0.9f, 0.8f, 0.4f}, 8)), 0},
    };
}

Outcome pbr_property_sweep() {
    const auto crops = sweep_crops();
    std::size_t out_of_range = 0, bad_normals = 0, bad_flat = 0, bad_roundtrip = 0, flat_heights = 0;
    double worst_len = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        for (const auto& crop : crops) {
            const PBRMaterial m = generate_material(crop, seed);
            for (Property p : kAllProperties)
                for (float v : m.map(p).data())
                    out_of_range += !(v >= 0.0f && v <= 1.0f);
            const auto n = m.normal.data();
            for (std::size_t i = 0; i < n.size(); i += 3) {
                out_of_range += !(n[i] >= 0.0f && n[i] <= 1.0f && n[i + 1] >= 0.0f && n[i + 1] <= 1.0f &&
                                  n[i + 2] >= 0.0f && n[i + 2] <= 1.0f);
                const double x = 2.0 * n[i] - 1.0, y = 2.0 * n[i + 1] - 1.0, z = 2.0 * n[i + 2] - 1.0;
                const double err = std::abs(std::sqrt(x * x + y * y + z * z) - 1.0);
                worst_len = std::max(worst_len, err);
                bad_normals += err > kUnitNormalTol;
            }
            const auto h = m.height.data();
            if (std::all_of(h.begin(), h.end(), [&](float v) { return v == h[0]; })) {
                ++flat_heights;
                for (std::size_t i = 0; i < n.size(); i += 3)
                    bad_flat += n[i] != 0.5f || n[i + 1] != 0.5f || n[i + 2] != 1.0f;
            }
            const RecipeSet back = recipes_from_json(nlohmann::json::parse(recipes_to_json(m.recipes).dump()));
            bad_roundtrip += !(back == m.recipes);
        }
    }

    // Closed-form ramp: h = x / (W - 1), W = 101, s = 4
    Raster ramp(101, 7, 1);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 101; ++x)
            ramp.at(x, y) = static_cast<float>(x / 100.0);
    const Raster rn = height_to_normal(ramp, 4.0);
    double ramp_err = 0.0;
    for (int y = 0; y < 7; ++y) {
        for (int x = 1; x < 100; ++x) {
            ramp_err = std::max(ramp_err, std::abs(2.0 * rn.at(x, y, 0) - 1.0 - -0.03998));
            ramp_err = std::max(ramp_err, std::abs(2.0 * rn.at(x, y, 1) - 1.0));
            ramp_err = std::max(ramp_err, std::abs(2.0 * rn.at(x, y, 2) - 1.0 - 0.99920));
        }
    }
    // A flat height map of any level gives straight-up normals.
    for (float level : {0.0f, 0.37f, 1.0f}) {
        const Raster fn = height_to_normal(Raster(16, 16, 1, level), 8.0);
        for (std::size_t i = 0; i < fn.data().size(); i += 3)
            bad_flat += fn.data()[i] != 0.5f || fn.data()[i + 1] != 0.5f || fn.data()[i + 2] != 1.0f;
    }

    std::ostringstream d;
    d << "3000 materials: " << out_of_range << " out-of-range values, max |len-1| " << fmt("%.2e", worst_len)
      << " (" << bad_normals << " over " << kUnitNormalTol << "), " << flat_heights << " flat heights, " << bad_flat
      << " non-vertical flat normals, ramp error " << fmt("%.2e", ramp_err) << ", " << bad_roundtrip
      << " recipe round-trip mismatches";
    return {out_of_range == 0 && bad_normals == 0 && bad_flat == 0 && ramp_err <= kRampNormalTol && bad_roundtrip == 0,
            d.str()};
}

Outcome mixing_identities() {
    const auto crops = sweep_crops();
    std::size_t r0_bad = 0, r1_bad = 0, affine_bad = 0, pairs = 0;
    double worst_affine = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const PBRMaterial a = generate_material(crops[seed % 3], seed);
        const PBRMaterial b = generate_material(crops[(seed + 1) % 3], seed + 1000);
        ++pairs;
        const PBRMaterial m0 = mix_materials(a, b, MixSpec::uniform(0.0));
        const PBRMaterial m1 = mix_materials(a, b, MixSpec::uniform(1.0));
        for (Property p : kAllProperties) {
            r0_bad += !(m0.map(p) == a.map(p));
            r1_bad += !(m1.map(p) == b.map(p));
        }
        for (double r : {0.1, 0.25, 0.5, 0.8}) {
            MixSpec spec = sample_mix_spec(seed);
            if (spec.mode == MixMode::global)
                spec = MixSpec::uniform(r);
            const PBRMaterial m = mix_materials(a, b, spec);
            for (Property p : kAllProperties) {
                const double rp = spec.ratio(p);
                const Raster q8 = quantize_8bit(m.map(p));
                const auto pa = a.map(p).data(), pb = b.map(p).data(), pq = q8.data();
                for (std::size_t i = 0; i < pq.size(); ++i) {
                    const double err = std::abs(pq[i] - ((1.0 - rp) * pa[i] + rp * pb[i]));
                    worst_affine = std::max(worst_affine, err);
                    affine_bad += err > kQuantStep;
                }
            }
        }
    }
    std::ostringstream d;
    d << pairs << " pairs: r=0 mismatched maps " << r0_bad << ", r=1 mismatched maps " << r1_bad
      << ", worst affine error after 8-bit quantization " << fmt("%.5f", worst_affine) << " (limit "
      << fmt("%.5f", kQuantStep) << ")";
    return {r0_bad == 0 && r1_bad == 0 && affine_bad == 0, d.str()};
}

Outcome flatness_filter() {
    TempDir in, out;
    write_image(in / "constant.png", constant_image(1024, 1024, {0.45f, 0.5f, 0.55f}));
    const Raster faint = noise_image(1024, 1024, 51, {0.5f, 0.5f, 0.5f}, 0.05f);
    write_image(in / "near_constant.png", faint);
    write_image(in / "noise.png", noise_image(1024, 1024, 52));
    PipelineConfig cfg;
    cfg.input_dir = in.path();
    cfg.output_dir = out.path();
    cfg.jobs = 1;
    const auto m = scan_corpus(cfg);
    std::map<std::string, int> yield;
    for (const auto& t : m["textures"])
        ++yield[t["source_image"].get<std::string>()];
    std::ostringstream d;
    d << "default config: constant " << yield["constant.png"] << " crops, near-constant (std "
      << fmt("%.4f", color_std(quantize_8bit(faint))) << ") " << yield["near_constant.png"] << " crops, iid noise "
      << yield["noise.png"] << " crops";
    return {yield["constant.png"] == 0 && yield["near_constant.png"] == 0 && yield["noise.png"] >= 1 &&
                color_std(quantize_8bit(faint)) < 0.02,
            d.str()};
}

Outcome size_bounds() {
    TempDir in;
    write_small_corpus(in);
    write_image(in / "big.png", noise_image(2400, 1800, 61));
    write_image(in / "small.png", noise_image(300, 260, 62));
    std::size_t total = 0, violations = 0;
    std::ostringstream d;
    for (const auto& [lo, hi] : std::vector<std::pair<int, int>>{{240, 1000}, {300, 480}, {400, 1000}}) {
        TempDir out;
        PipelineConfig cfg;
        cfg.input_dir = in.path();
        cfg.output_dir = out.path();
        cfg.detect.threshold = 0.15;
        cfg.min_crop_px = lo;
        cfg.max_crop_px = hi;
        const auto m = scan_corpus(cfg);
        std::size_t n = 0;
        for (const auto& t : m["textures"]) {
            const int w = t["rect"]["w"];
            violations += w < lo || w > hi || t["rect"]["h"] != w;
            const auto hdr = read_png_header(read_file_bytes(out / t["file"].get<std::string>()));
            violations += hdr.width != w;
            ++n;
        }
        total += n;
        d << "[" << lo << "," << hi << "]: " << n << " crops; ";
    }
    d << violations << " outside bounds";
    return {violations == 0 && total > 0, d.str()};
}

Outcome corpus_yield() {
    TempDir in, out;
    Rng rng(71);
    for (int i = 0; i < 100; ++i) {
        const int w = 640 + 40 * rng.index(16), h = 480 + 40 * rng.index(12);
        const std::array<float, 3> mean = {static_cast<float>(rng.uniform(0.2, 0.8)),
                                           static_cast<float>(rng.uniform(0.2, 0.8)),
                                           static_cast<float>(rng.uniform(0.2, 0.8))};
        Raster img;
        switch (i % 4) {
        case 0: img = quadrant_mosaic(std::max(w, h) / 2 * 2, 100 + i); break;
        case 1: img = noise_image(w, h, 200 + i, mean, 0.6f); break;
        case 2: img = blotch_image(w, h, 300 + i, mean, 0.7f, 2); break;
        default: img = constant_image(w, h, mean); break;
        }
        write_image(in / ("img" + std::to_string(1000 + i) + ".png"), img);
    }
    PipelineConfig cfg;
    cfg.input_dir = in.path();
    cfg.output_dir = out.path();
    cfg.detect.threshold = 0.15;
    const auto t0 = Clock::now();
    const auto m = scan_corpus(cfg);
    const double secs = seconds_since(t0);
    std::size_t violations = 0;
    for (const auto& t : m["textures"]) {
        const int w = t["rect"]["w"];
        violations += w < cfg.min_crop_px || w > cfg.max_crop_px;
        violations += t["max_pair_distance"].get<double>() > cfg.detect.threshold;
    }
    std::ostringstream d;
    d << "100 synthetic images: " << m["textures"].size() << " textures, " << m["materials"].size()
      << " materials, " << violations << " invariant violations, " << fmt("%.1f s", secs) << " (limit "
      << kCorpusSeconds << " s)";
    return {!m["textures"].empty() && violations == 0 && secs <= kCorpusSeconds, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"quadrant-mosaic-recovery", quadrant_mosaic_recovery},
        {"js-distance-metric-suite", js_metric_suite},
        {"brute-force-detector-equivalence", brute_force_equivalence},
        {"determinism", determinism},
        {"pbr-property-sweep", pbr_property_sweep},
        {"mixing-identities", mixing_identities},
        {"flatness-filter", flatness_filter},
        {"size-bounds", size_bounds},
        {"corpus-yield", corpus_yield},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt("%.1f s", seconds_since(t0))
                  << "]" << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size()
              << std::endl;
    return failed ? 1 : 0;
}
