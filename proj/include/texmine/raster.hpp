#ifndef TEXMINE_RASTER_HPP
#define TEXMINE_RASTER_HPP

#include "texmine/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace texmine {

/// Interleaved float image, row-major, values in [0,1].
class Raster {
public:
    Raster() = default;

    Raster(int width, int height, int channels, float fill = 0.0f)
        : width_(width), height_(height), channels_(channels),
          data_(checked_size(width, height, channels), fill) {}

    Raster(int width, int height, int channels, std::vector<float> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
        if (data_.size() != checked_size(width, height, channels))
            throw ShapeMismatch("raster data length does not match dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return data_.empty(); }

    float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    /// Edge-replicating accessor.
    float clamped(int x, int y, int c = 0) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[index(x, y, c)];
    }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    bool operator==(const Raster&) const = default;

private:
    static std::size_t checked_size(int w, int h, int c) {
        if (w < 0 || h < 0 || c < 1)
            throw InvalidArgument("raster dimensions must be non-negative with at least one channel");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c);
    }

    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

inline float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }
inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Copies one channel into a single-channel raster.
inline Raster extract_channel(const Raster& r, int channel) {
    if (channel < 0 || channel >= r.channels())
        throw InvalidArgument("channel index out of range");
    Raster out(r.width(), r.height(), 1);
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            out.at(x, y) = r.at(x, y, channel);
    return out;
}

/// Replicates a single-channel raster into `channels` identical planes.
inline Raster replicate_channels(const Raster& r, int channels) {
    if (r.channels() != 1)
        throw InvalidArgument("replicate_channels expects a single-channel raster");
    Raster out(r.width(), r.height(), channels);
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            for (int c = 0; c < channels; ++c)
                out.at(x, y, c) = r.at(x, y);
    return out;
}

inline Raster crop(const Raster& r, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > r.width() || y0 + h > r.height())
        throw InvalidArgument("crop rectangle outside raster");
    Raster out(w, h, r.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < r.channels(); ++c)
                out.at(x, y, c) = r.at(x0 + x, y0 + y, c);
    return out;
}

/// Snaps every value to the nearest 8-bit level, i.e. the values an 8-bit PNG round trip yields.
inline Raster quantize_8bit(const Raster& r) {
    Raster out = r;
    for (float& v : out.data())
        v = static_cast<float>(static_cast<double>(std::lround(clamp01(v) * 255.0f)) / 255.0);
    return out;
}

/// Bilinear resampling to an arbitrary size using pixel-center alignment.
inline Raster resample_bilinear(const Raster& r, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1)
        throw InvalidArgument("resample target must be at least 1x1");
    if (r.empty())
        throw InvalidArgument("cannot resample an empty raster");
    if (new_w == r.width() && new_h == r.height())
        return r;

    const double sx = static_cast<double>(r.width()) / new_w;
    const double sy = static_cast<double>(r.height()) / new_h;
    Raster out(new_w, new_h, r.channels());
    for (int y = 0; y < new_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(r.height() - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, r.height() - 1);
        const float wy = static_cast<float>(fy - y0);
        for (int x = 0; x < new_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(r.width() - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, r.width() - 1);
            const float wx = static_cast<float>(fx - x0);
            for (int c = 0; c < r.channels(); ++c) {
                // lerp form keeps constant inputs exactly constant
                const float top = r.at(x0, y0, c) + wx * (r.at(x1, y0, c) - r.at(x0, y0, c));
                const float bot = r.at(x0, y1, c) + wx * (r.at(x1, y1, c) - r.at(x0, y1, c));
                out.at(x, y, c) = clamp01(top + wy * (bot - top));
            }
        }
    }
    return out;
}

/// Shrinks so the longest edge equals `target`. Never upscales.
inline Raster resize_longest_edge(const Raster& r, int target) {
    if (target < 1)
        throw InvalidArgument("resize target must be >= 1");
    const int longest = std::max(r.width(), r.height());
    if (longest <= target)
        return r;
    const double scale = static_cast<double>(target) / longest;
    int w = r.width() >= r.height() ? target : static_cast<int>(std::lround(r.width() * scale));
    int h = r.height() > r.width() ? target : static_cast<int>(std::lround(r.height() * scale));
    return resample_bilinear(r, std::max(w, 1), std::max(h, 1));
}

struct Hsv {
    double h = 0.0; ///< hue in [0,1), fraction of a full turn
    double s = 0.0;
    double v = 0.0;
};

inline Hsv rgb_to_hsv(double r, double g, double b) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    Hsv out;
    out.v = mx;
    out.s = mx > 0.0 ? delta / mx : 0.0;
    if (delta <= 0.0)
        return out; // achromatic: hue 0
    double h;
    if (mx == r)
        h = (g - b) / delta;
    else if (mx == g)
        h = (b - r) / delta + 2.0;
    else
        h = (r - g) / delta + 4.0;
    h /= 6.0;
    if (h < 0.0)
        h += 1.0;
    out.h = h >= 1.0 ? 0.0 : h;
    return out;
}

inline std::array<double, 3> hsv_to_rgb(Hsv hsv) {
    const double h6 = (hsv.h - std::floor(hsv.h)) * 6.0;
    const double c = hsv.v * hsv.s;
    const double x = c * (1.0 - std::fabs(std::fmod(h6, 2.0) - 1.0));
    const double m = hsv.v - c;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h6) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    return {r + m, g + m, b + m};
}

struct HsvPlanes {
    Raster h;
    Raster s;
    Raster v;
};

inline HsvPlanes rgb_to_hsv(const Raster& r) {
    if (r.channels() != 3)
        throw InvalidArgument("rgb_to_hsv requires a 3-channel raster");
    HsvPlanes out{Raster(r.width(), r.height(), 1), Raster(r.width(), r.height(), 1),
                  Raster(r.width(), r.height(), 1)};
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            const Hsv p = rgb_to_hsv(r.at(x, y, 0), r.at(x, y, 1), r.at(x, y, 2));
            out.h.at(x, y) = static_cast<float>(p.h);
            out.s.at(x, y) = static_cast<float>(p.s);
            out.v.at(x, y) = static_cast<float>(p.v);
        }
    }
    return out;
}

/// Rotates hue by `turns` (fraction of 360 degrees), keeping S and V.
inline Raster rotate_hue(const Raster& r, double turns) {
    if (r.channels() != 3)
        throw InvalidArgument("rotate_hue requires a 3-channel raster");
    Raster out(r.width(), r.height(), 3);
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            Hsv p = rgb_to_hsv(r.at(x, y, 0), r.at(x, y, 1), r.at(x, y, 2));
            p.h = p.h + turns - std::floor(p.h + turns);
            const auto rgb = hsv_to_rgb(p);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = static_cast<float>(clamp01(rgb[c]));
        }
    }
    return out;
}

} // namespace texmine

#endif // TEXMINE_RASTER_HPP
