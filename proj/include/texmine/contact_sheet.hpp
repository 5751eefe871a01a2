#ifndef TEXMINE_CONTACT_SHEET_HPP
#define TEXMINE_CONTACT_SHEET_HPP

#include "texmine/pbr.hpp"
#include "texmine/raster.hpp"

#include <vector>

namespace texmine {

struct SheetLayout {
    int columns = 0;
    int rows = 0;
};

inline SheetLayout sheet_layout(std::size_t items, int columns) {
    if (items == 0)
        throw EmptyInput("contact sheet needs at least one item");
    if (columns < 1)
        throw InvalidArgument("columns must be >= 1");
    const int cols = static_cast<int>(std::min<std::size_t>(items, static_cast<std::size_t>(columns)));
    return {cols, static_cast<int>((items + cols - 1) / cols)};
}

/// Scales to fit a tile and centers it on a black 3-channel tile.
inline Raster make_tile(const Raster& item, int tile_px) {
    const Raster rgb = item.channels() == 1 ? replicate_channels(item, 3) : item;
    const double scale = static_cast<double>(tile_px) / std::max(rgb.width(), rgb.height());
    const int w = std::max(1, static_cast<int>(std::lround(rgb.width() * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(rgb.height() * scale)));
    const Raster scaled = resample_bilinear(rgb, w, h);
    Raster tile(tile_px, tile_px, 3);
    const int ox = (tile_px - w) / 2, oy = (tile_px - h) / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                tile.at(ox + x, oy + y, c) = scaled.at(x, y, c);
    return tile;
}

/// Row-major montage; cells past the last item stay black.
inline Raster contact_sheet(const std::vector<Raster>& items, int columns, int tile_px = 128) {
    const SheetLayout layout = sheet_layout(items.size(), columns);
    if (tile_px < 1)
        throw InvalidArgument("tile size must be >= 1");
    Raster sheet(layout.columns * tile_px, layout.rows * tile_px, 3);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Raster tile = make_tile(items[i], tile_px);
        const int ox = static_cast<int>(i % layout.columns) * tile_px;
        const int oy = static_cast<int>(i / layout.columns) * tile_px;
        for (int y = 0; y < tile_px; ++y)
            for (int x = 0; x < tile_px; ++x)
                for (int c = 0; c < 3; ++c)
                    sheet.at(ox + x, oy + y, c) = tile.at(x, y, c);
    }
    return sheet;
}

/// One row per material: albedo, roughness, metallic, height, normal, transmission.
inline Raster material_sheet(const std::vector<PBRMaterial>& materials, int tile_px = 128) {
    if (materials.empty())
        throw EmptyInput("contact sheet needs at least one item");
    std::vector<Raster> tiles;
    for (const auto& m : materials) {
        for (const Raster* r : {&m.albedo, &m.roughness, &m.metallic, &m.height, &m.normal, &m.transmission})
            tiles.push_back(*r);
    }
    return contact_sheet(tiles, 6, tile_px);
}

} // namespace texmine

#endif // TEXMINE_CONTACT_SHEET_HPP
