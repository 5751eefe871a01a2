#ifndef TEXMINE_GRID_STATS_HPP
#define TEXMINE_GRID_STATS_HPP

#include "texmine/features.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace texmine {

struct GridParams {
    int cell_px = 40;
    int bins = 32;

    void validate() const {
        if (cell_px < 8)
            throw InvalidArgument("cell_px must be >= 8");
        if (bins < 2 || bins > 256)
            throw InvalidArgument("bins must be in [2, 256]");
    }

    bool operator==(const GridParams&) const = default;
};

/// Normalized histograms of all feature planes of one cell.
class CellHistogram {
public:
    CellHistogram() = default;
    CellHistogram(int channels, int bins)
        : channels_(channels), bins_(bins), mass_(static_cast<std::size_t>(channels) * bins, 0.0) {}

    int channels() const { return channels_; }
    int bins() const { return bins_; }

    std::span<double> channel(int c) { return {mass_.data() + static_cast<std::size_t>(c) * bins_, static_cast<std::size_t>(bins_)}; }
    std::span<const double> channel(int c) const {
        return {mass_.data() + static_cast<std::size_t>(c) * bins_, static_cast<std::size_t>(bins_)};
    }

    bool operator==(const CellHistogram&) const = default;

private:
    int channels_ = 0;
    int bins_ = 0;
    std::vector<double> mass_;
};

struct GridStats {
    int cells_w = 0;
    int cells_h = 0;
    int cell_px = 0;
    std::vector<CellHistogram> cells; ///< row-major

    const CellHistogram& cell(int cx, int cy) const { return cells[static_cast<std::size_t>(cy) * cells_w + cx]; }
    int index(int cx, int cy) const { return cy * cells_w + cx; }
};

inline int bucket_of(float v, int bins) {
    const int b = static_cast<int>(std::floor(static_cast<double>(v) * bins));
    return std::clamp(b, 0, bins - 1);
}

/// Tiles the stack into complete cells (right/bottom remainders dropped)
/// and histograms every feature plane of every cell.
inline GridStats build_grid_stats(const FeatureStack& f, const GridParams& p) {
    p.validate();
    if (f.width() < p.cell_px || f.height() < p.cell_px)
        throw ImageTooSmall("feature stack smaller than one grid cell");

    GridStats g;
    g.cells_w = f.width() / p.cell_px;
    g.cells_h = f.height() / p.cell_px;
    g.cell_px = p.cell_px;
    g.cells.reserve(static_cast<std::size_t>(g.cells_w) * g.cells_h);

    const double inv = 1.0 / (static_cast<double>(p.cell_px) * p.cell_px);
    std::vector<std::uint32_t> counts(p.bins);
    for (int cy = 0; cy < g.cells_h; ++cy) {
        for (int cx = 0; cx < g.cells_w; ++cx) {
            CellHistogram h(kFeaturePlanes, p.bins);
            for (int c = 0; c < kFeaturePlanes; ++c) {
                std::fill(counts.begin(), counts.end(), 0u);
                for (int y = cy * p.cell_px; y < (cy + 1) * p.cell_px; ++y)
                    for (int x = cx * p.cell_px; x < (cx + 1) * p.cell_px; ++x)
                        ++counts[bucket_of(f.at(c, x, y), p.bins)];
                auto dst = h.channel(c);
                for (int b = 0; b < p.bins; ++b)
                    dst[b] = counts[b] * inv;
            }
            g.cells.push_back(std::move(h));
        }
    }
    return g;
}

/// Jensen-Shannon divergence (base 2) between two discrete distributions.
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
    double kl_p = 0.0, kl_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0)
            kl_p += p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0)
            kl_q += q[i] * std::log2(q[i] / m);
    }
    return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
}

/// Mean over feature channels of the per-channel Jensen-Shannon distance.
inline double js_distance(const CellHistogram& a, const CellHistogram& b) {
    if (a.channels() != b.channels() || a.bins() != b.bins())
        throw ShapeMismatch("histograms differ in channel or bin count");
    if (a.channels() == 0)
        return 0.0;
    double sum = 0.0;
    for (int c = 0; c < a.channels(); ++c)
        sum += std::sqrt(js_divergence(a.channel(c), b.channel(c)));
    return sum / a.channels();
}

/// Memo of cell-pair distances restricted to pairs whose coordinates differ
/// by less than `max_window` on both axes. Entries are filled on demand.
class PairwiseTable {
public:
    PairwiseTable(const GridStats& g, int max_window) : grid_(&g), max_window_(max_window) {
        if (max_window < 2)
            throw InvalidArgument("max_window must be >= 2");
    }

    int max_window() const { return max_window_; }

    bool in_range(int i, int j) const {
        const int dx = std::abs(i % grid_->cells_w - j % grid_->cells_w);
        const int dy = std::abs(i / grid_->cells_w - j / grid_->cells_w);
        return dx < max_window_ && dy < max_window_;
    }

    /// Distance between cells i and j (row-major indices).
    double distance(int i, int j) {
        if (i == j)
            return 0.0;
        if (!in_range(i, j))
            throw InvalidArgument("cell pair outside the table neighborhood");
        const auto key = pair_key(i, j);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        const double d = js_distance(grid_->cells[i], grid_->cells[j]);
        memo_.emplace(key, d);
        return d;
    }

    std::optional<double> stored(int i, int j) const {
        auto it = memo_.find(pair_key(i, j));
        if (it == memo_.end())
            return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return memo_.size(); }

    void fill_all() {
        const int n = static_cast<int>(grid_->cells.size());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (in_range(i, j))
                    distance(i, j);
    }

private:
    static std::uint64_t pair_key(int i, int j) {
        if (i > j)
            std::swap(i, j);
        return static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32 | static_cast<std::uint32_t>(j);
    }

    const GridStats* grid_;
    int max_window_;
    std::unordered_map<std::uint64_t, double> memo_;
};

/// Eagerly computed table over every in-range pair.
inline PairwiseTable pairwise_distance_table(const GridStats& g, int max_window) {
    PairwiseTable t(g, max_window);
    t.fill_all();
    return t;
}

} // namespace texmine

#endif // TEXMINE_GRID_STATS_HPP
