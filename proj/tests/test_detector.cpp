#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include "texmine/detector.hpp"

#include <gtest/gtest.h>

#include <set>
#include <tuple>

using namespace texmine;
using namespace texmine::testing;

namespace {

GridStats uniform_grid(int w, int h) {
    Rng rng(3);
    const CellHistogram cell = random_histogram(rng, kFeaturePlanes, 8);
    GridStats g;
    g.cells_w = w;
    g.cells_h = h;
    g.cell_px = 40;
    g.cells.assign(static_cast<std::size_t>(w) * h, cell);
    return g;
}

using WindowSet = std::set<std::tuple<int, int, int>>;

WindowSet window_set(const GridStats& g, const DetectParams& p) {
    WindowSet out;
    for (const auto& w : all_accepted_windows(g, p))
        out.insert({w.x, w.y, w.side});
    return out;
}

} // namespace

TEST(FindUniformRegions, IdenticalCellsLargestWindowPerOrigin) {
    const GridStats g = uniform_grid(8, 8);
    DetectParams p;
    p.min_cells = 6;
    const auto regions = find_uniform_regions(g, p);
    // Origins admitting a side >= 6 window: x, y in {0,1,2}; side = 8 - max(x, y).
    ASSERT_EQ(regions.size(), 9u);
    EXPECT_EQ(regions[0], (RegionCandidate{0, 0, 8, 0.0}));
    EXPECT_EQ(regions[1], (RegionCandidate{1, 0, 7, 0.0}));
    EXPECT_EQ(regions[2], (RegionCandidate{0, 1, 7, 0.0}));
    EXPECT_EQ(regions[3], (RegionCandidate{1, 1, 7, 0.0}));
    for (const auto& r : regions)
        EXPECT_EQ(r.side, 8 - std::max(r.cell_x, r.cell_y));
}

TEST(FindUniformRegions, MaxCellsCapsSide) {
    DetectParams p;
    p.min_cells = 3;
    p.max_cells = 4;
    const auto regions = find_uniform_regions(uniform_grid(6, 6), p);
    for (const auto& r : regions)
        EXPECT_LE(r.side, 4);
    EXPECT_EQ(regions.front().side, 4);
}

TEST(FindUniformRegions, TwoHalvesNeverSpanned) {
    // Left half of the image from one noise texture, right half from another;
    // each 40 px cell belongs entirely to one side.
    Raster img(480, 320, 3);
    paste(img, noise_image(240, 320, 1, {0.2f, 0.3f, 0.4f}, 0.3f), 0, 0);
    paste(img, blotch_image(240, 320, 2, {0.8f, 0.6f, 0.2f}, 0.8f, 2), 240, 0);
    const GridStats g = build_grid_stats(compute_features(img), GridParams{40, 32});
    DetectParams p;
    p.threshold = 0.2;
    p.min_cells = 3;
    const auto regions = find_uniform_regions(g, p);
    ASSERT_FALSE(regions.empty());
    for (const auto& r : regions) {
        const bool left = r.cell_x + r.side <= 6;
        const bool right = r.cell_x >= 6;
        EXPECT_TRUE(left || right) << r.cell_x << "," << r.cell_y << " side " << r.side;
    }
    EXPECT_EQ(regions, brute_force_regions(g, p));
}

TEST(FindUniformRegions, CliqueSoundness) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GridStats g = patchy_grid(seed, 9, 8);
        DetectParams p;
        p.threshold = 0.12;
        p.min_cells = 2;
        p.max_cells = 8;
        for (const auto& r : find_uniform_regions(g, p)) {
            double worst = 0.0;
            for (int i = 0; i < r.side * r.side; ++i)
                for (int j = i + 1; j < r.side * r.side; ++j) {
                    const double d = js_distance(g.cell(r.cell_x + i % r.side, r.cell_y + i / r.side),
                                                 g.cell(r.cell_x + j % r.side, r.cell_y + j / r.side));
                    ASSERT_LE(d, p.threshold);
                    worst = std::max(worst, d);
                }
            EXPECT_EQ(worst, r.max_pair_distance);
        }
    }
}

TEST(FindUniformRegions, MatchesBruteForceOnSmallGrids) {
    for (std::uint64_t seed = 100; seed < 115; ++seed) {
        const GridStats g = patchy_grid(seed, 7 + static_cast<int>(seed % 5), 6 + static_cast<int>(seed % 3));
        DetectParams p;
        p.threshold = 0.08 + 0.01 * static_cast<double>(seed % 6);
        p.min_cells = 2 + static_cast<int>(seed % 3);
        p.max_cells = 6 + static_cast<int>(seed % 4);
        EXPECT_EQ(find_uniform_regions(g, p), brute_force_regions(g, p)) << "seed " << seed;
    }
}

TEST(FindUniformRegions, ThresholdMonotonicity) {
    const GridStats g = patchy_grid(77, 10, 10);
    DetectParams p;
    p.min_cells = 2;
    p.max_cells = 10;
    WindowSet prev;
    for (double t : {0.02, 0.05, 0.08, 0.1, 0.13, 0.2, 0.4}) {
        p.threshold = t;
        const WindowSet cur = window_set(g, p);
        EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) << "t=" << t;
        // The detector's per-origin maxima are consistent with the accepted set.
        for (const auto& r : find_uniform_regions(g, p))
            EXPECT_TRUE(cur.count({r.cell_x, r.cell_y, r.side}));
        prev = cur;
    }
}

TEST(FindUniformRegions, DeterministicOrder) {
    const GridStats g = patchy_grid(5, 10, 10);
    DetectParams p;
    p.min_cells = 2;
    p.threshold = 0.15;
    const auto a = find_uniform_regions(g, p);
    EXPECT_EQ(a, find_uniform_regions(g, p));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), candidate_before));
}

TEST(FindUniformRegions, GridTooSmall) {
    DetectParams p;
    EXPECT_THROW(find_uniform_regions(uniform_grid(5, 8), p), GridTooSmall);
    p.min_cells = 7;
    p.max_cells = 6;
    EXPECT_THROW(find_uniform_regions(uniform_grid(8, 8), p), InvalidArgument);
}

TEST(SuppressOverlaps, IdenticalCandidatesCollapse) {
    const RegionCandidate c{1, 1, 6, 0.05};
    EXPECT_EQ(suppress_overlaps({c, c}, DetectParams{}).size(), 1u);
}

TEST(SuppressOverlaps, DisjointCandidatesBothKept) {
    const RegionCandidate a{0, 0, 6, 0.05}, b{6, 0, 6, 0.06};
    EXPECT_EQ(cell_iou(a, b), 0.0);
    EXPECT_EQ(suppress_overlaps({a, b}, DetectParams{}).size(), 2u);
}

TEST(SuppressOverlaps, NestedWindowDropped) {
    const RegionCandidate big{0, 0, 8, 0.05}, small{1, 1, 6, 0.04};
    // intersection 6x6 = 36, union 64 + 36 - 36 = 64
    EXPECT_DOUBLE_EQ(cell_iou(big, small), 36.0 / 64.0);
    const auto kept = suppress_overlaps({big, small}, DetectParams{});
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0], big);
}

TEST(SuppressOverlaps, IouAtThresholdKept) {
    DetectParams p;
    p.overlap_iou = 0.25;
    // 2x4 overlap of two 4x4 windows: 8 / 24 = 1/3 > 0.25; 1x4 overlap: 4 / 28 < 0.25
    EXPECT_EQ(suppress_overlaps({{0, 0, 4, 0}, {2, 0, 4, 0}}, p).size(), 1u);
    EXPECT_EQ(suppress_overlaps({{0, 0, 4, 0}, {3, 0, 4, 0}}, p).size(), 2u);
    p.overlap_iou = 1.0 / 3.0;
    EXPECT_EQ(suppress_overlaps({{0, 0, 4, 0}, {2, 0, 4, 0}}, p).size(), 2u);
}

TEST(IsFlat, ConstantCrop) { EXPECT_TRUE(is_flat(constant_image(50, 50, {0.3f, 0.3f, 0.9f}), DetectParams{})); }

TEST(IsFlat, UniformNoise) {
    const Raster n = noise_image(200, 200, 17);
    // std of U(0,1) is 1/sqrt(12)
    EXPECT_NEAR(color_std(n), 1.0 / std::sqrt(12.0), 0.01);
    EXPECT_FALSE(is_flat(n, DetectParams{}));
}

TEST(IsFlat, FaintCheckerboard) {
    Raster r(40, 40, 3);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x)
            for (int c = 0; c < 3; ++c)
                r.at(x, y, c) = (x + y) % 2 ? 0.51f : 0.49f;
    EXPECT_NEAR(color_std(r), 0.01, 1e-6);
    EXPECT_TRUE(is_flat(r, DetectParams{}));
}

TEST(ExtractCrops, RectArithmetic) {
    const Raster src = noise_image(400, 400, 3);
    const GridStats g = build_grid_stats(compute_features(src), GridParams{40, 32});
    const auto crops = extract_crops(src, g, {{2, 3, 6, 0.07}}, DetectParams{}, "img");
    ASSERT_EQ(crops.size(), 1u);
    EXPECT_EQ(crops[0].rect, (PixelRect{80, 120, 240, 240}));
    EXPECT_EQ(crops[0].raster, crop(src, 80, 120, 240, 240));
    EXPECT_EQ(crops[0].source_id, "img");
    EXPECT_EQ(crops[0].max_pair_distance, 0.07);
}

TEST(ExtractCrops, FlatSourceYieldsNothing) {
    const Raster src = constant_image(400, 400, {0.5f, 0.5f, 0.5f});
    const GridStats g = build_grid_stats(compute_features(src), GridParams{40, 32});
    EXPECT_TRUE(extract_crops(src, g, {{0, 0, 10, 0.0}, {2, 3, 6, 0.0}}, DetectParams{}, "flat").empty());
}

TEST(ExtractCrops, SizeBoundsAndOrder) {
    const Raster src = noise_image(400, 400, 4);
    const GridStats g = build_grid_stats(compute_features(src), GridParams{40, 32});
    const std::vector<RegionCandidate> regions = {{0, 0, 8, 0.1}, {0, 0, 5, 0.1}, {4, 4, 6, 0.1}};
    const auto crops = extract_crops(src, g, regions, DetectParams{}, "n", CropBounds{240, 300});
    ASSERT_EQ(crops.size(), 1u);
    EXPECT_EQ(crops[0].rect.x, 160);
    const auto all = extract_crops(src, g, regions, DetectParams{}, "n", CropBounds{1, 1000});
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].rect.w, 320);
    EXPECT_EQ(all[1].rect.w, 200);
    EXPECT_EQ(all[2].rect.w, 240);
}

TEST(DetectTextures, FullGridNoiseImage) {
    const Raster src = noise_image(1024, 1024, 21);
    DetectParams p;
    p.threshold = 0.15;
    const auto crops = detect_textures(src, GridParams{}, p, CropBounds{}, "noise");
    ASSERT_FALSE(crops.empty());
    EXPECT_GE(crops[0].rect.w, 960);
    for (const auto& c : crops) {
        EXPECT_EQ(c.rect.w, c.rect.h);
        EXPECT_EQ(c.rect.w % 40, 0);
        EXPECT_FALSE(is_flat(c.raster, p));
    }
}

TEST(DetectTextures, SmallImageYieldsNothing) {
    EXPECT_TRUE(detect_textures(noise_image(200, 600, 1), GridParams{}, DetectParams{}, CropBounds{}, "s").empty());
}
