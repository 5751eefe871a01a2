#ifndef TEXMINE_DETECTOR_HPP
#define TEXMINE_DETECTOR_HPP

#include "texmine/grid_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

namespace texmine {

struct DetectParams {
    double threshold = 0.10;
    int min_cells = 6;
    int max_cells = 24;
    double flat_std = 0.02;
    double overlap_iou = 0.30;

    void validate() const {
        // 0 is accepted: it admits only windows of identical cells.
        if (!(threshold >= 0.0 && threshold < 1.0))
            throw InvalidArgument("threshold must be in [0, 1)");
        if (min_cells < 2 || min_cells > max_cells)
            throw InvalidArgument("require 2 <= min_cells <= max_cells");
        if (overlap_iou < 0.0 || overlap_iou > 1.0)
            throw InvalidArgument("overlap_iou must be in [0, 1]");
        if (flat_std < 0.0)
            throw InvalidArgument("flat_std must be >= 0");
    }

    bool operator==(const DetectParams&) const = default;
};

/// Crop width limits in pixels, both inclusive.
struct CropBounds {
    int min_px = 240;
    int max_px = 1000;

    bool contains(int w) const { return w >= min_px && w <= max_px; }
    bool operator==(const CropBounds&) const = default;
};

struct RegionCandidate {
    int cell_x = 0;
    int cell_y = 0;
    int side = 0;
    double max_pair_distance = 0.0;

    bool operator==(const RegionCandidate&) const = default;
};

struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const PixelRect&) const = default;
};

struct TextureCrop {
    std::string source_id;
    PixelRect rect;
    Raster raster;
    double max_pair_distance = 0.0;
};

/// Canonical candidate order: larger side first, then tighter windows, then position.
inline bool candidate_before(const RegionCandidate& a, const RegionCandidate& b) {
    return std::tuple(-a.side, a.max_pair_distance, a.cell_y, a.cell_x) <
           std::tuple(-b.side, b.max_pair_distance, b.cell_y, b.cell_x);
}

/// Largest square windows, one per top-left cell, whose cells are all
/// pairwise within `threshold`.
inline std::vector<RegionCandidate> find_uniform_regions(const GridStats& g, const DetectParams& p) {
    p.validate();
    if (g.cells_w < p.min_cells || g.cells_h < p.min_cells)
        throw GridTooSmall("grid smaller than min_cells x min_cells");

    PairwiseTable table(g, p.max_cells);
    std::vector<RegionCandidate> out;
    std::vector<int> members;
    members.reserve(static_cast<std::size_t>(p.max_cells) * p.max_cells);

    for (int y0 = 0; y0 + p.min_cells <= g.cells_h; ++y0) {
        for (int x0 = 0; x0 + p.min_cells <= g.cells_w; ++x0) {
            const int limit = std::min({p.max_cells, g.cells_w - x0, g.cells_h - y0});
            members.clear();
            members.push_back(g.index(x0, y0));
            double worst = 0.0;
            int side = 1;
            // A window is a clique only if the window one smaller is, so grow until the first failure.
            while (side < limit) {
                const int s = side + 1;
                std::vector<int> added;
                for (int k = 0; k < s; ++k)
                    added.push_back(g.index(x0 + s - 1, y0 + k));
                for (int k = 0; k < s - 1; ++k)
                    added.push_back(g.index(x0 + k, y0 + s - 1));

                double grown = worst;
                bool ok = true;
                for (std::size_t a = 0; a < added.size() && ok; ++a) {
                    for (int m : members) {
                        const double d = table.distance(added[a], m);
                        if (d > p.threshold) { ok = false; break; }
                        grown = std::max(grown, d);
                    }
                    for (std::size_t b = 0; b < a && ok; ++b) {
                        const double d = table.distance(added[a], added[b]);
                        if (d > p.threshold) { ok = false; break; }
                        grown = std::max(grown, d);
                    }
                }
                if (!ok)
                    break;
                members.insert(members.end(), added.begin(), added.end());
                worst = grown;
                side = s;
            }
            if (side >= p.min_cells)
                out.push_back({x0, y0, side, worst});
        }
    }
    std::sort(out.begin(), out.end(), candidate_before);
    return out;
}

inline double cell_iou(const RegionCandidate& a, const RegionCandidate& b) {
    const int ix = std::max(0, std::min(a.cell_x + a.side, b.cell_x + b.side) - std::max(a.cell_x, b.cell_x));
    const int iy = std::max(0, std::min(a.cell_y + a.side, b.cell_y + b.side) - std::max(a.cell_y, b.cell_y));
    const double inter = static_cast<double>(ix) * iy;
    const double uni = static_cast<double>(a.side) * a.side + static_cast<double>(b.side) * b.side - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

/// Greedy non-maximum suppression in the given (canonical) order.
inline std::vector<RegionCandidate> suppress_overlaps(const std::vector<RegionCandidate>& cands,
                                                      const DetectParams& p) {
    std::vector<RegionCandidate> kept;
    for (const auto& c : cands) {
        const bool clear = std::all_of(kept.begin(), kept.end(),
                                       [&](const RegionCandidate& k) { return cell_iou(c, k) <= p.overlap_iou; });
        if (clear)
            kept.push_back(c);
    }
    return kept;
}

/// Mean over R,G,B of the per-channel population standard deviation.
inline double color_std(const Raster& r) {
    if (r.channels() != 3)
        throw InvalidArgument("color_std requires a 3-channel raster");
    const double n = static_cast<double>(r.pixel_count());
    if (n == 0.0)
        return 0.0;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0, sum_sq = 0.0;
        for (int y = 0; y < r.height(); ++y) {
            for (int x = 0; x < r.width(); ++x) {
                const double v = r.at(x, y, c);
                sum += v;
                sum_sq += v * v;
            }
        }
        const double mean = sum / n;
        total += std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
    }
    return total / 3.0;
}

inline bool is_flat(const Raster& crop_raster, const DetectParams& p) {
    return color_std(crop_raster) < p.flat_std;
}

inline PixelRect region_rect(const RegionCandidate& r, int cell_px) {
    return {r.cell_x * cell_px, r.cell_y * cell_px, r.side * cell_px, r.side * cell_px};
}

/// Cuts region pixels out of `source`, dropping flat crops and crops outside `bounds`.
inline std::vector<TextureCrop> extract_crops(const Raster& source, const GridStats& g,
                                              const std::vector<RegionCandidate>& regions,
                                              const DetectParams& p, const std::string& source_id,
                                              const CropBounds& bounds = {}) {
    std::vector<TextureCrop> out;
    for (const auto& region : regions) {
        const PixelRect rect = region_rect(region, g.cell_px);
        if (!bounds.contains(rect.w))
            continue;
        Raster pixels = crop(source, rect.x, rect.y, rect.w, rect.h);
        if (is_flat(pixels, p))
            continue;
        out.push_back({source_id, rect, std::move(pixels), region.max_pair_distance});
    }
    return out;
}

/// Full per-image detection chain on an already resized raster.
inline std::vector<TextureCrop> detect_textures(const Raster& image, const GridParams& gp, const DetectParams& dp,
                                                const CropBounds& bounds, const std::string& source_id) {
    gp.validate();
    dp.validate();
    if (image.width() < gp.cell_px * dp.min_cells || image.height() < gp.cell_px * dp.min_cells)
        return {};
    const GridStats grid = build_grid_stats(compute_features(image), gp);
    const auto regions = suppress_overlaps(find_uniform_regions(grid, dp), dp);
    return extract_crops(image, grid, regions, dp, source_id, bounds);
}

} // namespace texmine

#endif // TEXMINE_DETECTOR_HPP
