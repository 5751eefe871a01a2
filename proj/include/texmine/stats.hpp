#ifndef TEXMINE_STATS_HPP
#define TEXMINE_STATS_HPP

#include "texmine/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace texmine {

struct StatsReport {
    std::size_t images = 0;
    std::size_t skipped = 0;
    std::size_t textures = 0;
    std::size_t materials = 0;
    std::size_t mixes = 0;
    int min_crop_px = 0;
    int max_crop_px = 0;
    bool all_within_bounds = true;
    /// (lower edge in px, count); buckets are 120 px wide
    std::vector<std::pair<int, std::size_t>> size_histogram;
    std::map<std::string, std::size_t> per_image_yield;
    /// 10 buckets over [0, 0.5]; the last also holds larger values
    std::vector<std::size_t> distance_histogram = std::vector<std::size_t>(10, 0);
    double distance_min = 0.0;
    double distance_mean = 0.0;
    double distance_max = 0.0;
};

inline constexpr int kSizeBucketPx = 120;

inline StatsReport compute_stats(const nlohmann::json& manifest) {
    StatsReport r;
    try {
        r.images = manifest.at("images").size();
        r.skipped = manifest.at("skipped").size();
        r.textures = manifest.at("textures").size();
        for (const auto& m : manifest.at("materials")) {
            ++r.materials;
            if (m.contains("mix"))
                ++r.mixes;
        }
        r.min_crop_px = manifest.at("config").at("min_crop_px").get<int>();
        r.max_crop_px = manifest.at("config").at("max_crop_px").get<int>();

        for (const auto& img : manifest.at("images"))
            r.per_image_yield[img.at("path").get<std::string>()] = 0;

        std::map<int, std::size_t> sizes;
        double sum = 0.0;
        bool first = true;
        for (const auto& t : manifest.at("textures")) {
            const int w = t.at("rect").at("w").get<int>();
            ++sizes[w / kSizeBucketPx * kSizeBucketPx];
            if (w < r.min_crop_px || w > r.max_crop_px)
                r.all_within_bounds = false;
            ++r.per_image_yield[t.at("source_image").get<std::string>()];
            const double d = t.at("max_pair_distance").get<double>();
            sum += d;
            r.distance_min = first ? d : std::min(r.distance_min, d);
            r.distance_max = first ? d : std::max(r.distance_max, d);
            first = false;
            const auto bucket = std::min<std::size_t>(9, static_cast<std::size_t>(std::max(0.0, d) / 0.05));
            ++r.distance_histogram[bucket];
        }
        r.size_histogram.assign(sizes.begin(), sizes.end());
        r.distance_mean = r.textures ? sum / static_cast<double>(r.textures) : 0.0;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestInvalid(std::string("malformed manifest: ") + e.what());
    }
    return r;
}

inline nlohmann::json stats_to_json(const StatsReport& r) {
    nlohmann::json sizes = nlohmann::json::array();
    for (const auto& [lo, n] : r.size_histogram)
        sizes.push_back({{"min_px", lo}, {"max_px", lo + kSizeBucketPx - 1}, {"count", n}});
    return {
        {"counts",
         {{"images", r.images},
          {"skipped", r.skipped},
          {"textures", r.textures},
          {"materials", r.materials},
          {"mixes", r.mixes}}},
        {"crop_bounds", {{"min_px", r.min_crop_px}, {"max_px", r.max_crop_px}, {"all_within", r.all_within_bounds}}},
        {"crop_size_histogram", sizes},
        {"per_image_yield", r.per_image_yield},
        {"distance",
         {{"min", r.distance_min}, {"mean", r.distance_mean}, {"max", r.distance_max},
          {"bucket_width", 0.05}, {"histogram", r.distance_histogram}}},
    };
}

inline std::string stats_to_text(const StatsReport& r) {
    std::ostringstream out;
    out << "images:    " << r.images << " (" << r.skipped << " skipped)\n";
    out << "textures:  " << r.textures << "\n";
    out << "materials: " << r.materials << " (" << r.mixes << " mixes)\n";
    out << "crop bounds [" << r.min_crop_px << ", " << r.max_crop_px << "] px: "
        << (r.all_within_bounds ? "all within" : "VIOLATED") << "\n";
    out << "crop sizes:\n";
    for (const auto& [lo, n] : r.size_histogram)
        out << "  " << lo << "-" << lo + kSizeBucketPx - 1 << " px: " << n << "\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "max pair distance: min %.4f  mean %.4f  max %.4f\n", r.distance_min,
                  r.distance_mean, r.distance_max);
    out << buf;
    out << "per-image yield:\n";
    for (const auto& [path, n] : r.per_image_yield)
        out << "  " << path << ": " << n << "\n";
    return out.str();
}

} // namespace texmine

#endif // TEXMINE_STATS_HPP
