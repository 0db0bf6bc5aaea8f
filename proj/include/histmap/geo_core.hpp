#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace histmap {

// Land-cover classes. Values are the raw mask values written to disk.
enum class LandCover : std::uint8_t {
    buildings = 1,
    infrastructure = 2,
    recreational = 3,
    sealed = 4,
    water = 5,
};

inline constexpr int kClassCount = 5;

inline constexpr bool is_valid_class(int class_id) { return class_id >= 1 && class_id <= kClassCount; }

std::string_view class_name(int class_id);

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

using Ring = std::vector<Point>;

/// Outer ring plus holes. Rings are stored open (no repeated closing vertex);
/// orientation is not significant since filling uses the even-odd rule.
struct Polygon {
    std::vector<Ring> rings;

    friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct Polyline {
    std::vector<Point> vertices;

    friend bool operator==(const Polyline&, const Polyline&) = default;
};

using Geometry = std::variant<Polygon, Polyline>;

enum class LabelKind : std::uint8_t { none, house_number, street_name, place_name };

std::string_view to_string(LabelKind kind);
std::optional<LabelKind> label_kind_from_string(std::string_view text);

struct FeatureRecord {
    Geometry geometry;
    int class_id = static_cast<int>(LandCover::sealed);
    int z_order = 0;
    std::string label;
    LabelKind label_kind = LabelKind::none;

    bool is_polygon() const { return std::holds_alternative<Polygon>(geometry); }

    friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

/// Draw priority used when a feature carries no explicit override:
/// sealed < recreational < water < infrastructure < buildings.
int default_z_order(int class_id);

/// Ordered first-match table from source properties to land-cover class.
///
/// A rule's value pattern is either `*` (any value, key must be present),
/// a `|`-separated list of alternatives, or an exact string.
struct ClassRule {
    std::string key;
    std::string pattern;
    int class_id = 0;

    bool matches(std::string_view value) const;
};

struct ClassMap {
    std::vector<ClassRule> rules;
    std::optional<int> default_class;

    /// Throws ConfigError if any rule or the default targets an invalid class.
    void validate() const;

    /// Default table for OpenStreetMap tags.
    static ClassMap osm_default();
    static ClassMap from_json(std::string_view text);
    static ClassMap load(const std::string& path);
    std::string to_json() const;
};

struct ParseResult {
    std::vector<FeatureRecord> features;
    std::size_t skipped = 0; ///< features with unsupported geometry kinds
};

/// Parses the GeoJSON subset: FeatureCollection of Polygon, MultiPolygon and
/// LineString features. Points and other geometry kinds are skipped.
///
/// Reserved properties: `histmap:class` (bypasses the class map),
/// `histmap:z` (draw order override), `histmap:label` and
/// `histmap:label_kind`. Otherwise labels come from `addr:housenumber`
/// (house number) or `name` (street name on lines, place name on areas).
ParseResult parse_feature_collection(std::string_view text, const ClassMap& class_map);

/// Writes features as a FeatureCollection using only reserved properties, so
/// parsing the result with any class map reproduces the records.
std::string serialize_feature_collection(const std::vector<FeatureRecord>& features);

struct BoundingBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

std::optional<BoundingBox> bounding_box(const std::vector<FeatureRecord>& features);

/// One rendered patch. The origin is the upper-left corner in map units;
/// map y grows upwards (north-up), so pixel row r covers map y in
/// (origin_y - (r+1)/scale, origin_y - r/scale].
struct TileWindow {
    double origin_x = 0.0;
    double origin_y = 0.0;
    int width_px = 1;
    int height_px = 1;
    double scale = 1.0; ///< pixels per map unit
    std::int64_t tile_id = 0;

    double map_width() const { return width_px / scale; }
    double map_height() const { return height_px / scale; }

    void validate() const;

    friend bool operator==(const TileWindow&, const TileWindow&) = default;
};

enum class EdgePolicy {
    clamp,  ///< last row/column shifted inward so tiles stay inside the bbox
    extend, ///< last row/column keeps the regular stride and overhangs the bbox
};

/// Row-major tiling of `bbox` (top row first) with stride patch - overlap.
/// When the bbox is smaller than one patch footprint a single window at the
/// bbox corner is emitted.
std::vector<TileWindow> tile_windows(const BoundingBox& bbox, std::array<int, 2> patch_px,
                                     double scale, int overlap_px,
                                     EdgePolicy policy = EdgePolicy::clamp);

} // namespace histmap
