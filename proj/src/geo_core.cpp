#include "histmap/geo_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "histmap/errors.hpp"

namespace histmap {

using json = nlohmann::json;

namespace {

constexpr std::string_view kClassNames[] = {"buildings", "infrastructure", "recreational", "sealed", "water"};

using PropertyMap = std::map<std::string, std::string, std::less<>>;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min(byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

[[noreturn]] void structural_error(std::size_t feature, const std::string& where, const std::string& what) {
    throw ParseError("feature " + std::to_string(feature) + " (" + where + "): " + what);
}

Point parse_position(const json& j, std::size_t feature, const std::string& where) {
    if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
        structural_error(feature, where, "position must be an array of at least two numbers");
    const Point p{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) structural_error(feature, where, "non-finite coordinate");
    return p;
}

std::vector<Point> parse_positions(const json& j, std::size_t feature, const std::string& where) {
    if (!j.is_array()) structural_error(feature, where, "expected an array of positions");
    std::vector<Point> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_position(j[i], feature, where + "/" + std::to_string(i)));
    return out;
}

std::size_t distinct_count(const std::vector<Point>& pts) {
    std::set<std::pair<double, double>> seen;
    for (const auto& p : pts) seen.emplace(p.x, p.y);
    return seen.size();
}

Ring parse_ring(const json& j, std::size_t feature, const std::string& where) {
    Ring ring = parse_positions(j, feature, where);
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    if (distinct_count(ring) < 3) structural_error(feature, where, "ring needs at least 3 distinct vertices");
    return ring;
}

Polygon parse_polygon(const json& j, std::size_t feature, const std::string& where) {
    if (!j.is_array() || j.empty()) structural_error(feature, where, "polygon needs at least one ring");
    Polygon poly;
    for (std::size_t r = 0; r < j.size(); ++r) poly.rings.push_back(parse_ring(j[r], feature, where + "/" + std::to_string(r)));
    return poly;
}

PropertyMap parse_properties(const json& j, std::size_t feature) {
    PropertyMap props;
    if (j.is_null()) return props;
    if (!j.is_object()) structural_error(feature, "properties", "properties must be an object");
    for (const auto& [key, value] : j.items()) {
        if (value.is_null()) continue;
        props.emplace(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    return props;
}

int parse_int_property(const std::string& text, std::size_t feature, const char* key) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        structural_error(feature, std::string("properties/") + key, "expected an integer, got '" + text + "'");
    return value;
}

int classify(const PropertyMap& props, const ClassMap& class_map, std::size_t feature) {
    if (auto it = props.find("histmap:class"); it != props.end()) {
        const int c = parse_int_property(it->second, feature, "histmap:class");
        if (!is_valid_class(c)) throw ClassificationError("feature " + std::to_string(feature) + ": class " + it->second + " out of range", feature);
        return c;
    }
    for (const auto& rule : class_map.rules) {
        if (auto it = props.find(rule.key); it != props.end() && rule.matches(it->second)) return rule.class_id;
    }
    if (class_map.default_class) return *class_map.default_class;
    throw ClassificationError("feature " + std::to_string(feature) + " matches no class rule and no default class is set",
                              feature);
}

void assign_label(FeatureRecord& rec, const PropertyMap& props, std::size_t feature) {
    if (auto it = props.find("histmap:label"); it != props.end()) {
        rec.label = it->second;
        rec.label_kind = rec.is_polygon() ? LabelKind::place_name : LabelKind::street_name;
        if (auto k = props.find("histmap:label_kind"); k != props.end()) {
            auto kind = label_kind_from_string(k->second);
            if (!kind) structural_error(feature, "properties/histmap:label_kind", "unknown label kind '" + k->second + "'");
            rec.label_kind = *kind;
        }
        if (rec.label_kind == LabelKind::none) rec.label.clear();
        return;
    }
    if (auto it = props.find("addr:housenumber"); it != props.end()) {
        rec.label = it->second;
        rec.label_kind = LabelKind::house_number;
    } else if (auto n = props.find("name"); n != props.end()) {
        rec.label = n->second;
        rec.label_kind = rec.is_polygon() ? LabelKind::place_name : LabelKind::street_name;
    }
}

json position_json(const Point& p) { return json::array({p.x, p.y}); }

json ring_json(const Ring& ring) {
    json out = json::array();
    for (const auto& p : ring) out.push_back(position_json(p));
    if (!ring.empty()) out.push_back(position_json(ring.front()));
    return out;
}

int class_from_json(const json& j) {
    if (j.is_number_integer()) return j.get<int>();
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        for (int c = 1; c <= kClassCount; ++c)
            if (kClassNames[c - 1] == name) return c;
        throw ConfigError("unknown class name '" + name + "'");
    }
    throw ConfigError("class must be an integer or a class name");
}

} // namespace

std::string_view class_name(int class_id) {
    return is_valid_class(class_id) ? kClassNames[class_id - 1] : std::string_view("invalid");
}

std::string_view to_string(LabelKind kind) {
    switch (kind) {
    case LabelKind::none: return "none";
    case LabelKind::house_number: return "house_number";
    case LabelKind::street_name: return "street_name";
    case LabelKind::place_name: return "place_name";
    }
    return "none";
}

std::optional<LabelKind> label_kind_from_string(std::string_view text) {
    for (auto k : {LabelKind::none, LabelKind::house_number, LabelKind::street_name, LabelKind::place_name})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

int default_z_order(int class_id) {
    switch (static_cast<LandCover>(class_id)) {
    case LandCover::sealed: return 0;
    case LandCover::recreational: return 1;
    case LandCover::water: return 2;
    case LandCover::infrastructure: return 3;
    case LandCover::buildings: return 4;
    }
    return 0;
}

bool ClassRule::matches(std::string_view value) const {
    if (pattern == "*") return true;
    std::string_view rest = pattern;
    for (;;) {
        const auto bar = rest.find('|');
        if (rest.substr(0, bar) == value) return true;
        if (bar == std::string_view::npos) return false;
        rest.remove_prefix(bar + 1);
    }
}

void ClassMap::validate() const {
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!is_valid_class(rules[i].class_id))
            throw ConfigError("class map rule " + std::to_string(i) + " targets invalid class " +
                              std::to_string(rules[i].class_id));
        if (rules[i].key.empty()) throw ConfigError("class map rule " + std::to_string(i) + " has an empty key");
    }
    if (default_class && !is_valid_class(*default_class))
        throw ConfigError("default_class " + std::to_string(*default_class) + " is not a valid class");
}

ClassMap ClassMap::osm_default() {
    ClassMap m;
    m.rules = {
        {"building", "*", 1},
        {"natural", "water|bay|wetland", 5},
        {"waterway", "*", 5},
        {"water", "*", 5},
        {"landuse", "reservoir|basin", 5},
        {"highway", "*", 2},
        {"railway", "*", 2},
        {"bridge", "yes", 2},
        {"leisure", "park|garden|pitch|playground|sports_centre|stadium|track|recreation_ground", 3},
        {"landuse", "grass|recreation_ground|allotments|cemetery|meadow|forest|village_green", 3},
        {"natural", "wood|scrub|grassland", 3},
        {"amenity", "parking|marketplace", 4},
        {"area:highway", "*", 4},
        {"landuse", "*", 4},
    };
    m.default_class = static_cast<int>(LandCover::sealed);
    return m;
}

ClassMap ClassMap::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte);
        throw ParseError("class map: malformed JSON", line, col);
    }
    ClassMap m;
    try {
        for (const auto& r : j.at("rules")) {
            m.rules.push_back({r.at("key").get<std::string>(), r.value("value", std::string("*")), class_from_json(r.at("class"))});
        }
        if (j.contains("default_class") && !j["default_class"].is_null()) m.default_class = class_from_json(j["default_class"]);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("class map: ") + e.what());
    }
    m.validate();
    return m;
}

ClassMap ClassMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read class map '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string ClassMap::to_json() const {
    json j;
    j["rules"] = json::array();
    for (const auto& r : rules) j["rules"].push_back({{"key", r.key}, {"value", r.pattern}, {"class", r.class_id}});
    j["default_class"] = default_class ? json(*default_class) : json(nullptr);
    return j.dump(2);
}

ParseResult parse_feature_collection(std::string_view text, const ClassMap& class_map) {
    class_map.validate();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte);
        throw ParseError("malformed GeoJSON", line, col);
    }
    if (!doc.is_object() || doc.value("type", std::string()) != "FeatureCollection")
        throw ParseError("document root must be a FeatureCollection object");
    const auto features = doc.find("features");
    if (features == doc.end() || !features->is_array()) throw ParseError("FeatureCollection has no 'features' array");

    ParseResult result;
    for (std::size_t i = 0; i < features->size(); ++i) {
        const json& f = (*features)[i];
        if (!f.is_object()) structural_error(i, "feature", "feature must be an object");
        const auto g = f.find("geometry");
        if (g == f.end() || g->is_null()) {
            ++result.skipped;
            continue;
        }
        if (!g->is_object()) structural_error(i, "geometry", "geometry must be an object");
        const std::string type = g->value("type", std::string());
        const auto coords = g->find("coordinates");

        std::vector<Geometry> geometries;
        if (type == "Polygon" || type == "MultiPolygon" || type == "LineString") {
            if (coords == g->end()) structural_error(i, "geometry", "missing coordinates");
        }
        if (type == "Polygon") {
            geometries.emplace_back(parse_polygon(*coords, i, "coordinates"));
        } else if (type == "MultiPolygon") {
            if (!coords->is_array()) structural_error(i, "coordinates", "MultiPolygon needs an array of polygons");
            for (std::size_t p = 0; p < coords->size(); ++p)
                geometries.emplace_back(parse_polygon((*coords)[p], i, "coordinates/" + std::to_string(p)));
        } else if (type == "LineString") {
            Polyline line{parse_positions(*coords, i, "coordinates")};
            if (distinct_count(line.vertices) < 2) structural_error(i, "coordinates", "line needs at least 2 distinct vertices");
            geometries.emplace_back(std::move(line));
        } else {
            ++result.skipped;
            continue;
        }

        const auto props = parse_properties(f.contains("properties") ? f["properties"] : json(nullptr), i);
        const int class_id = classify(props, class_map, i);
        int z = default_z_order(class_id);
        if (auto it = props.find("histmap:z"); it != props.end()) z = parse_int_property(it->second, i, "histmap:z");

        for (auto& geom : geometries) {
            FeatureRecord rec;
            rec.geometry = std::move(geom);
            rec.class_id = class_id;
            rec.z_order = z;
            assign_label(rec, props, i);
            result.features.push_back(std::move(rec));
        }
    }
    return result;
}

std::string serialize_feature_collection(const std::vector<FeatureRecord>& features) {
    json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
    for (const auto& rec : features) {
        json geom;
        if (const auto* poly = std::get_if<Polygon>(&rec.geometry)) {
            json rings = json::array();
            for (const auto& r : poly->rings) rings.push_back(ring_json(r));
            geom = {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
        } else {
            json coords = json::array();
            for (const auto& p : std::get<Polyline>(rec.geometry).vertices) coords.push_back(position_json(p));
            geom = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
        }
        json props{{"histmap:class", std::to_string(rec.class_id)}, {"histmap:z", std::to_string(rec.z_order)}};
        if (rec.label_kind != LabelKind::none) {
            props["histmap:label"] = rec.label;
            props["histmap:label_kind"] = std::string(to_string(rec.label_kind));
        }
        fc["features"].push_back({{"type", "Feature"}, {"geometry", std::move(geom)}, {"properties", std::move(props)}});
    }
    return fc.dump();
}

std::optional<BoundingBox> bounding_box(const std::vector<FeatureRecord>& features) {
    std::optional<BoundingBox> box;
    auto grow = [&](const Point& p) {
        if (!box) {
            box = BoundingBox{p.x, p.y, p.x, p.y};
            return;
        }
        box->x0 = std::min(box->x0, p.x);
        box->y0 = std::min(box->y0, p.y);
        box->x1 = std::max(box->x1, p.x);
        box->y1 = std::max(box->y1, p.y);
    };
    for (const auto& f : features) {
        if (const auto* poly = std::get_if<Polygon>(&f.geometry)) {
            for (const auto& r : poly->rings)
                for (const auto& p : r) grow(p);
        } else {
            for (const auto& p : std::get<Polyline>(f.geometry).vertices) grow(p);
        }
    }
    return box;
}

void TileWindow::validate() const {
    if (width_px < 1 || height_px < 1) throw ConfigError("tile window needs positive pixel dimensions");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("tile window scale must be positive and finite");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw ConfigError("tile window origin must be finite");
}

namespace {

// Offsets (in map units, from the bbox start) of tiles along one axis.
std::vector<double> axis_offsets(double extent, int patch, int overlap, double scale, EdgePolicy policy) {
    const double footprint = patch / scale;
    const double stride = (patch - overlap) / scale;
    std::vector<double> out{0.0};
    if (extent <= footprint) return out;
    const double steps = std::ceil((extent - footprint) / stride - 1e-9);
    for (int i = 1; i <= static_cast<int>(steps); ++i) {
        double off = i * stride;
        // Clamped offsets stay on the whole-pixel grid, overhanging by < 1 px.
        if (policy == EdgePolicy::clamp) off = std::min(off, std::ceil((extent - footprint) * scale - 1e-9) / scale);
        out.push_back(off);
    }
    return out;
}

} // namespace

std::vector<TileWindow> tile_windows(const BoundingBox& bbox, std::array<int, 2> patch_px, double scale,
                                     int overlap_px, EdgePolicy policy) {
    if (!(bbox.x1 > bbox.x0) || !(bbox.y1 > bbox.y0)) throw ConfigError("bbox must satisfy x1 > x0 and y1 > y0");
    if (patch_px[0] < 1 || patch_px[1] < 1) throw ConfigError("patch dimensions must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be positive and finite");
    if (overlap_px < 0) throw ConfigError("overlap must be non-negative");
    if (overlap_px >= patch_px[0] || overlap_px >= patch_px[1])
        throw ConfigError("overlap " + std::to_string(overlap_px) + " must be smaller than the patch dimensions");

    const auto xs = axis_offsets(bbox.x1 - bbox.x0, patch_px[0], overlap_px, scale, policy);
    const auto ys = axis_offsets(bbox.y1 - bbox.y0, patch_px[1], overlap_px, scale, policy);
    std::vector<TileWindow> out;
    out.reserve(xs.size() * ys.size());
    for (double dy : ys) {
        for (double dx : xs) {
            TileWindow w;
            w.origin_x = bbox.x0 + dx;
            w.origin_y = bbox.y1 - dy;
            w.width_px = patch_px[0];
            w.height_px = patch_px[1];
            w.scale = scale;
            w.tile_id = static_cast<std::int64_t>(out.size());
            out.push_back(w);
        }
    }
    return out;
}

} // namespace histmap
