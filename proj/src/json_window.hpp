#pragma once

#include <json.hpp>

#include "histmap/errors.hpp"
#include "histmap/geo_core.hpp"

namespace histmap::detail {

inline nlohmann::json window_to_json(const TileWindow& w) {
    return {{"tile_id", w.tile_id}, {"origin_x", w.origin_x}, {"origin_y", w.origin_y},
            {"width_px", w.width_px}, {"height_px", w.height_px}, {"scale", w.scale}};
}

inline TileWindow window_from_json(const nlohmann::json& j) {
    TileWindow w;
    w.tile_id = j.at("tile_id").get<std::int64_t>();
    w.origin_x = j.at("origin_x").get<double>();
    w.origin_y = j.at("origin_y").get<double>();
    w.width_px = j.at("width_px").get<int>();
    w.height_px = j.at("height_px").get<int>();
    w.scale = j.at("scale").get<double>();
    w.validate();
    return w;
}

} // namespace histmap::detail
