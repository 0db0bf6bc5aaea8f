#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "histmap/geo_core.hpp"
#include "histmap/raster.hpp"

namespace histmap {

struct ClassStyle {
    Rgb fill;
    Rgb stroke;
    double stroke_width_px = 0.0;
};

struct GridStyle {
    double spacing = 500.0; ///< map units between lines
    Rgb color{90, 90, 90};
    double width_px = 1.0;
};

struct LabelRule {
    int font_px = 10;
    Rgb color{20, 20, 20};
    bool enabled = false;
    double repeat_gap_px = 100.0; ///< gap between repeated street-name placements
};

/// Declarative cartographic style.
///
/// JSON schema (every key optional, missing keys keep the defaults):
/// {
///   "classes": { "buildings": {"fill": [r,g,b], "stroke": [r,g,b], "stroke_width_px": w}, ... },
///   "background_class": 4,
///   "grid": {"spacing": 500, "color": [r,g,b], "width_px": 1} | null,
///   "labels": { "house_number": {"font_px": 10, "color": [r,g,b], "enabled": true,
///                                "repeat_gap_px": 100}, "street_name": {...}, "place_name": {...} },
///   "anti_alias": true,
///   "font": "builtin" | "<path to glyph file>" | ""
/// }
struct StyleSpec {
    std::array<ClassStyle, kClassCount> classes;
    int background_class = static_cast<int>(LandCover::sealed);
    std::optional<GridStyle> grid;
    std::array<LabelRule, 3> labels; ///< indexed by LabelKind - 1
    bool anti_alias = true;
    std::string font = "builtin";

    const ClassStyle& class_style(int class_id) const { return classes.at(std::size_t(class_id - 1)); }
    ClassStyle& class_style(int class_id) { return classes.at(std::size_t(class_id - 1)); }
    const LabelRule& label_rule(LabelKind kind) const { return labels.at(std::size_t(kind) - 1); }
    LabelRule& label_rule(LabelKind kind) { return labels.at(std::size_t(kind) - 1); }

    bool any_label_enabled() const;

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    /// Beige sealed ground, red-brown buildings, pale streets, green parks,
    /// blue water. Labels off, grid every 500 map units.
    static StyleSpec historical_default();
    static StyleSpec from_json(std::string_view text);
    static StyleSpec load(const std::string& path);
    std::string to_json() const;
};

} // namespace histmap
