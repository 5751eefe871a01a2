#ifndef TEXMINE_TESTS_SYNTHETIC_HPP
#define TEXMINE_TESTS_SYNTHETIC_HPP

// Synthetic images and corpora for tests.

#include "texmine/image_io.hpp"
#include "texmine/raster.hpp"
#include "texmine/rng.hpp"

#include <array>
#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace texmine::testing {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "texmine") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline Raster constant_image(int w, int h, std::array<float, 3> rgb) {
    Raster r(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                r.at(x, y, c) = rgb[c];
    return r;
}

/// iid noise: mean[c] + amplitude * (u - 0.5), u ~ U[0,1).
inline Raster noise_image(int w, int h, std::uint64_t seed, std::array<float, 3> mean = {0.5f, 0.5f, 0.5f},
                          float amplitude = 1.0f) {
    Rng rng(seed);
    Raster r(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                r.at(x, y, c) = clamp01(static_cast<float>(mean[c] + amplitude * (rng.uniform() - 0.5)));
    return r;
}

/// Box-blurred noise (radius px) rescaled to roughly `amplitude` peak-to-peak.
inline Raster blotch_image(int w, int h, std::uint64_t seed, std::array<float, 3> mean, float amplitude, int radius) {
    const Raster base = noise_image(w, h, seed, {0.5f, 0.5f, 0.5f}, 1.0f);
    Raster r(w, h, 3);
    const float gain = static_cast<float>(2 * radius + 1); // blur shrinks std by ~1/(2r+1)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double sum = 0.0;
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx)
                        sum += base.clamped(x + dx, y + dy, c);
                const double avg = sum / ((2 * radius + 1) * (2 * radius + 1));
                r.at(x, y, c) = clamp01(static_cast<float>(mean[c] + amplitude * gain * 0.5 * (avg - 0.5)));
            }
        }
    }
    return r;
}

/// Diagonal stripes of the given period plus light noise.
inline Raster stripe_image(int w, int h, std::uint64_t seed, std::array<float, 3> lo, std::array<float, 3> hi,
                           int period) {
    Rng rng(seed);
    Raster r(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool on = ((x + y) / (period / 2)) % 2 == 0;
            for (int c = 0; c < 3; ++c)
                r.at(x, y, c) = clamp01(static_cast<float>((on ? hi[c] : lo[c]) + 0.1 * (rng.uniform() - 0.5)));
        }
    }
    return r;
}

inline void paste(Raster& dst, const Raster& src, int x0, int y0) {
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
            for (int c = 0; c < 3; ++c)
                dst.at(x0 + x, y0 + y, c) = src.at(x, y, c);
}

/// size x size image whose four quadrants hold four distinct stationary textures.
inline Raster quadrant_mosaic(int size = 1024, std::uint64_t seed = 7) {
    const int half = size / 2;
    Raster out(size, size, 3);
    paste(out, noise_image(half, half, seed + 1, {0.25f, 0.45f, 0.70f}, 0.5f), 0, 0);
    paste(out, blotch_image(half, half, seed + 2, {0.70f, 0.35f, 0.20f}, 0.6f, 3), half, 0);
    paste(out, stripe_image(half, half, seed + 3, {0.15f, 0.15f, 0.15f}, {0.85f, 0.80f, 0.60f}, 12), 0, half);
    paste(out, blotch_image(half, half, seed + 4, {0.40f, 0.70f, 0.35f}, 0.8f, 1), half, half);
    return out;
}

/// Quadrant index (0..3, row-major) of a pixel in a size x size mosaic.
inline int quadrant_of(int x, int y, int size = 1024) { return (y >= size / 2 ? 2 : 0) + (x >= size / 2 ? 1 : 0); }

inline void write_image(const fs::path& path, const Raster& r) {
    fs::create_directories(path.parent_path());
    write_png(path, r);
}

} // namespace texmine::testing

#endif // TEXMINE_TESTS_SYNTHETIC_HPP
