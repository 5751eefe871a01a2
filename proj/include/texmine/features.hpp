#ifndef TEXMINE_FEATURES_HPP
#define TEXMINE_FEATURES_HPP

#include "texmine/raster.hpp"

#include <array>
#include <span>
#include <vector>

namespace texmine {

/// Plane layout of a FeatureStack.
enum FeaturePlane : int {
    kPlaneR = 0,
    kPlaneG,
    kPlaneB,
    kPlaneDxR,
    kPlaneDxG,
    kPlaneDxB,
    kPlaneDyR,
    kPlaneDyG,
    kPlaneDyB,
};

inline constexpr int kFeaturePlanes = 9;

/// Colour planes plus per-channel Sobel responses, each plane in [0,1].
/// A zero gradient is stored as 0.5.
class FeatureStack {
public:
    FeatureStack() = default;
    FeatureStack(int width, int height)
        : width_(width), height_(height),
          planes_(static_cast<std::size_t>(kFeaturePlanes) * width * height, 0.0f) {}

    int width() const { return width_; }
    int height() const { return height_; }

    std::span<float> plane(int p) {
        return {planes_.data() + static_cast<std::size_t>(p) * width_ * height_,
                static_cast<std::size_t>(width_) * height_};
    }
    std::span<const float> plane(int p) const {
        return {planes_.data() + static_cast<std::size_t>(p) * width_ * height_,
                static_cast<std::size_t>(width_) * height_};
    }

    float at(int p, int x, int y) const { return plane(p)[static_cast<std::size_t>(y) * width_ + x]; }
    float& at(int p, int x, int y) { return plane(p)[static_cast<std::size_t>(y) * width_ + x]; }

    bool operator==(const FeatureStack&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> planes_;
};

/// Sobel responses lie in [-4,4] on [0,1] inputs; map them to [0,1].
inline float encode_gradient(float g) { return clamp01((g / 4.0f + 1.0f) * 0.5f); }

inline FeatureStack compute_features(const Raster& r) {
    if (r.channels() != 3)
        throw InvalidArgument("compute_features requires a 3-channel raster");
    if (r.width() < 3 || r.height() < 3)
        throw ImageTooSmall("compute_features requires at least 3x3 pixels");

    FeatureStack f(r.width(), r.height());
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < r.height(); ++y) {
            for (int x = 0; x < r.width(); ++x) {
                const float tl = r.clamped(x - 1, y - 1, c), tc = r.clamped(x, y - 1, c), tr = r.clamped(x + 1, y - 1, c);
                const float ml = r.clamped(x - 1, y, c), mr = r.clamped(x + 1, y, c);
                const float bl = r.clamped(x - 1, y + 1, c), bc = r.clamped(x, y + 1, c), br = r.clamped(x + 1, y + 1, c);
                const float gx = (tr + 2.0f * mr + br) - (tl + 2.0f * ml + bl);
                const float gy = (bl + 2.0f * bc + br) - (tl + 2.0f * tc + tr);
                f.at(kPlaneR + c, x, y) = r.at(x, y, c);
                f.at(kPlaneDxR + c, x, y) = encode_gradient(gx);
                f.at(kPlaneDyR + c, x, y) = encode_gradient(gy);
            }
        }
    }
    return f;
}

} // namespace texmine

#endif // TEXMINE_FEATURES_HPP
