#pragma once

#include <vector>

#include "histmap/geo_core.hpp"

namespace fixture {

using histmap::FeatureRecord;
using histmap::LabelKind;
using histmap::Point;

inline FeatureRecord area(std::vector<Point> ring, int cls, std::string label = {},
                          LabelKind kind = LabelKind::none) {
    FeatureRecord f;
    f.geometry = histmap::Polygon{{std::move(ring)}};
    f.class_id = cls;
    f.z_order = histmap::default_z_order(cls);
    f.label = std::move(label);
    f.label_kind = kind;
    return f;
}

inline FeatureRecord line(std::vector<Point> pts, std::string label = {}) {
    FeatureRecord f;
    f.geometry = histmap::Polyline{std::move(pts)};
    f.class_id = 2;
    f.z_order = histmap::default_z_order(2);
    f.label_kind = label.empty() ? LabelKind::none : LabelKind::street_name;
    f.label = std::move(label);
    return f;
}

// A small town on a 400 x 400 map-unit sheet: a park, a pond, two streets
// and a block of houses.
inline std::vector<FeatureRecord> town() {
    std::vector<FeatureRecord> f;
    f.push_back(area({{20, 20}, {180, 30}, {170, 170}, {30, 160}}, 3, "Stadtpark", LabelKind::place_name));
    f.push_back(area({{60, 60}, {120, 55}, {140, 100}, {90, 130}, {50, 100}}, 4));
    f.push_back(area({{250, 250}, {380, 240}, {390, 380}, {240, 390}}, 3));
    f.push_back(line({{0, 200}, {150, 205}, {400, 195}}, "Hauptstrasse"));
    f.push_back(line({{200, 0}, {205, 400}}, "Ringweg"));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) {
            const double x = 225 + i * 40, y = 20 + j * 55;
            f.push_back(area({{x, y}, {x + 28, y}, {x + 28, y + 35}, {x, y + 35}}, 5,
                             std::to_string(1 + i + 4 * j), LabelKind::house_number));
        }
    return f;
}

} // namespace fixture
