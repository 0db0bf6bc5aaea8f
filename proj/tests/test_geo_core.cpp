#include <gtest/gtest.h>

#include <random>

#include "histmap/errors.hpp"
#include "histmap/geo_core.hpp"

using namespace histmap;

namespace {

ClassMap building_map() {
    ClassMap m;
    m.rules = {{"building", "*", 1}};
    return m;
}

const char* kSquare = R"({"type":"FeatureCollection","features":[
  {"type":"Feature","properties":{"building":"yes"},
   "geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,10],[0,0]]]}}]})";

} // namespace

TEST(ParseFeatureCollection, SquareBuilding) {
    const auto r = parse_feature_collection(kSquare, building_map());
    ASSERT_EQ(r.features.size(), 1u);
    EXPECT_EQ(r.skipped, 0u);
    const auto& f = r.features[0];
    EXPECT_EQ(f.class_id, 1);
    const auto& poly = std::get<Polygon>(f.geometry);
    ASSERT_EQ(poly.rings.size(), 1u);
    EXPECT_EQ(poly.rings[0].size(), 4u);
    EXPECT_EQ(f.z_order, default_z_order(1));
}

TEST(ParseFeatureCollection, Empty) {
    const auto r = parse_feature_collection(R"({"type":"FeatureCollection","features":[]})", building_map());
    EXPECT_TRUE(r.features.empty());
    EXPECT_EQ(r.skipped, 0u);
}

TEST(ParseFeatureCollection, PointIsSkipped) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,0]]]}},
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"Point","coordinates":[3,3]}}]})";
    const auto r = parse_feature_collection(doc, building_map());
    EXPECT_EQ(r.features.size(), 1u);
    EXPECT_EQ(r.skipped, 1u);
}

TEST(ParseFeatureCollection, MultiPolygonExpands) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"MultiPolygon","coordinates":[
         [[[0,0],[1,0],[1,1],[0,0]]],
         [[[5,5],[6,5],[6,6],[5,5]]],
         [[[8,8],[9,8],[9,9],[8,8]]]]}}]})";
    const auto r = parse_feature_collection(doc, building_map());
    EXPECT_EQ(r.features.size(), 3u);
}

TEST(ParseFeatureCollection, MalformedReportsLineAndColumn) {
    const char* doc = "{\"type\":\"FeatureCollection\",\n\"features\":[\n  {oops}\n]}";
    try {
        parse_feature_collection(doc, building_map());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GE(e.column(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(ParseFeatureCollection, UnmatchedFeatureNamesIndex) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
      {"type":"Feature","properties":{"shop":"bakery"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})";
    try {
        parse_feature_collection(doc, building_map());
        FAIL() << "expected ClassificationError";
    } catch (const ClassificationError& e) {
        EXPECT_EQ(e.feature_index(), 1u);
    }
}

TEST(ParseFeatureCollection, DegenerateRingRejected) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[0,0]]]}}]})";
    EXPECT_THROW(parse_feature_collection(doc, building_map()), ParseError);
}

TEST(ParseFeatureCollection, NonFiniteOrMissingCoordinatesRejected) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},
       "geometry":{"type":"LineString","coordinates":[[0,0],["a",1]]}}]})";
    EXPECT_THROW(parse_feature_collection(doc, building_map()), ParseError);
}

TEST(ParseFeatureCollection, ReservedPropertiesAndLabels) {
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes","addr:housenumber":"12"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,0]]]}},
      {"type":"Feature","properties":{"highway":"primary","name":"Unter den Linden"},
       "geometry":{"type":"LineString","coordinates":[[0,0],[9,0]]}},
      {"type":"Feature","properties":{"histmap:class":5,"histmap:z":9,"name":"Spree"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,0]]]}}]})";
    const auto r = parse_feature_collection(doc, ClassMap::osm_default());
    ASSERT_EQ(r.features.size(), 3u);
    EXPECT_EQ(r.features[0].label, "12");
    EXPECT_EQ(r.features[0].label_kind, LabelKind::house_number);
    EXPECT_EQ(r.features[1].class_id, 2);
    EXPECT_EQ(r.features[1].label_kind, LabelKind::street_name);
    EXPECT_EQ(r.features[2].class_id, 5);
    EXPECT_EQ(r.features[2].z_order, 9);
    EXPECT_EQ(r.features[2].label_kind, LabelKind::place_name);
}

TEST(ClassMap, FirstMatchWins) {
    ClassMap m = ClassMap::from_json(R"({"rules":[
        {"key":"landuse","value":"grass|meadow","class":"recreational"},
        {"key":"landuse","value":"*","class":4}],"default_class":null})");
    const char* doc = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"landuse":"meadow"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
      {"type":"Feature","properties":{"landuse":"industrial"},
       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})";
    const auto r = parse_feature_collection(doc, m);
    EXPECT_EQ(r.features[0].class_id, 3);
    EXPECT_EQ(r.features[1].class_id, 4);
}

TEST(ClassMap, InvalidClassRejected) {
    EXPECT_THROW(ClassMap::from_json(R"({"rules":[{"key":"a","value":"*","class":7}]})"), ConfigError);
    EXPECT_THROW(ClassMap::from_json(R"({"rules":[],"default_class":0})"), ConfigError);
}

TEST(ClassMap, JsonRoundTrip) {
    const auto m = ClassMap::osm_default();
    const auto back = ClassMap::from_json(m.to_json());
    ASSERT_EQ(back.rules.size(), m.rules.size());
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
        EXPECT_EQ(back.rules[i].key, m.rules[i].key);
        EXPECT_EQ(back.rules[i].pattern, m.rules[i].pattern);
        EXPECT_EQ(back.rules[i].class_id, m.rules[i].class_id);
    }
    EXPECT_EQ(back.default_class, m.default_class);
}

TEST(ParseFeatureCollection, SerializeRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(-1e4, 1e4);
    std::vector<FeatureRecord> features;
    for (int i = 0; i < 40; ++i) {
        FeatureRecord f;
        f.class_id = 1 + int(rng() % 5);
        f.z_order = int(rng() % 11) - 5;
        if (i % 2 == 0) {
            Polygon p;
            for (int r = 0; r < 1 + int(rng() % 2); ++r) {
                Ring ring;
                for (int v = 0; v < 3 + int(rng() % 4); ++v) ring.push_back({coord(rng), coord(rng)});
                p.rings.push_back(ring);
            }
            f.geometry = p;
            if (i % 4 == 0) {
                f.label = "Nr. " + std::to_string(i);
                f.label_kind = LabelKind::house_number;
            }
        } else {
            Polyline l;
            for (int v = 0; v < 2 + int(rng() % 4); ++v) l.vertices.push_back({coord(rng), coord(rng)});
            f.geometry = l;
            if (i % 3 == 0) {
                f.label = "Straße " + std::to_string(i);
                f.label_kind = LabelKind::street_name;
            }
        }
        features.push_back(f);
    }
    const auto text = serialize_feature_collection(features);
    const auto back = parse_feature_collection(text, ClassMap{});
    EXPECT_EQ(back.features, features);
    EXPECT_EQ(serialize_feature_collection(back.features), text);
}

TEST(ParseFeatureCollection, ClassAssignmentIndependentOfOrder) {
    const char* a = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"building":"yes"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
      {"type":"Feature","properties":{"natural":"water"},"geometry":{"type":"Polygon","coordinates":[[[2,0],[3,0],[3,1],[2,0]]]}},
      {"type":"Feature","properties":{"highway":"service"},"geometry":{"type":"LineString","coordinates":[[0,0],[5,5]]}}]})";
    const char* b = R"({"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"highway":"service"},"geometry":{"type":"LineString","coordinates":[[0,0],[5,5]]}},
      {"type":"Feature","properties":{"building":"yes"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
      {"type":"Feature","properties":{"natural":"water"},"geometry":{"type":"Polygon","coordinates":[[[2,0],[3,0],[3,1],[2,0]]]}}]})";
    const auto ra = parse_feature_collection(a, ClassMap::osm_default());
    const auto rb = parse_feature_collection(b, ClassMap::osm_default());
    EXPECT_EQ(ra.features[0], rb.features[1]);
    EXPECT_EQ(ra.features[1], rb.features[2]);
    EXPECT_EQ(ra.features[2], rb.features[0]);
}

TEST(TileWindows, ExactTwoByTwo) {
    const auto w = tile_windows({0, 0, 1000, 1000}, {500, 500}, 1.0, 0);
    ASSERT_EQ(w.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(w[i].tile_id, i);
    EXPECT_DOUBLE_EQ(w[0].origin_x, 0.0);
    EXPECT_DOUBLE_EQ(w[0].origin_y, 1000.0);
    EXPECT_DOUBLE_EQ(w[1].origin_x, 500.0);
    EXPECT_DOUBLE_EQ(w[2].origin_y, 500.0);
}

TEST(TileWindows, SinglePatch) { EXPECT_EQ(tile_windows({0, 0, 500, 500}, {500, 500}, 1.0, 0).size(), 1u); }

TEST(TileWindows, OverlapClampedEdge) {
    const auto w = tile_windows({0, 0, 1200, 500}, {500, 500}, 1.0, 100);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_DOUBLE_EQ(w[0].origin_x, 0.0);
    EXPECT_DOUBLE_EQ(w[1].origin_x, 400.0);
    EXPECT_DOUBLE_EQ(w[2].origin_x, 700.0); // shifted inward so the tile ends at the bbox edge
}

TEST(TileWindows, OverlapExtendedEdge) {
    const auto w = tile_windows({0, 0, 1200, 500}, {500, 500}, 1.0, 100, EdgePolicy::extend);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_DOUBLE_EQ(w[0].origin_x, 0.0);
    EXPECT_DOUBLE_EQ(w[1].origin_x, 400.0);
    EXPECT_DOUBLE_EQ(w[2].origin_x, 800.0);
}

TEST(TileWindows, OverlapNotSmallerThanPatchRejected) {
    EXPECT_THROW(tile_windows({0, 0, 100, 100}, {50, 50}, 1.0, 50), ConfigError);
    EXPECT_THROW(tile_windows({0, 0, 100, 100}, {50, 40}, 1.0, 45), ConfigError);
    EXPECT_THROW(tile_windows({0, 0, 0, 100}, {50, 50}, 1.0, 0), ConfigError);
}

TEST(TileWindows, CoverBboxProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const BoundingBox b{u(rng) * 100 - 50, u(rng) * 100 - 50, 0, 0};
        BoundingBox bbox = b;
        bbox.x1 = b.x0 + 1 + u(rng) * 900;
        bbox.y1 = b.y0 + 1 + u(rng) * 900;
        const int pw = 16 + int(rng() % 200);
        const int ph = 16 + int(rng() % 200);
        const int overlap = int(rng() % std::uint64_t(std::min(pw, ph)));
        const double scale = 0.25 + u(rng) * 2.0;
        const auto policy = trial % 2 ? EdgePolicy::clamp : EdgePolicy::extend;
        const auto windows = tile_windows(bbox, {pw, ph}, scale, overlap, policy);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            ASSERT_EQ(windows[i].tile_id, std::int64_t(i));
            ASSERT_EQ(windows[i].width_px, pw);
        }
        for (int s = 0; s < 200; ++s) {
            const double x = bbox.x0 + u(rng) * (bbox.x1 - bbox.x0);
            const double y = bbox.y0 + u(rng) * (bbox.y1 - bbox.y0);
            bool covered = false;
            for (const auto& w : windows)
                if (x >= w.origin_x && x <= w.origin_x + w.map_width() && y <= w.origin_y &&
                    y >= w.origin_y - w.map_height())
                    covered = true;
            ASSERT_TRUE(covered) << "trial " << trial << " point " << x << "," << y;
        }
        // Corners are covered too.
        for (const auto& [x, y] : {std::pair{bbox.x0, bbox.y0}, {bbox.x1, bbox.y1}, {bbox.x0, bbox.y1}, {bbox.x1, bbox.y0}}) {
            bool covered = false;
            for (const auto& w : windows)
                if (x >= w.origin_x - 1e-9 && x <= w.origin_x + w.map_width() + 1e-9 && y <= w.origin_y + 1e-9 &&
                    y >= w.origin_y - w.map_height() - 1e-9)
                    covered = true;
            ASSERT_TRUE(covered);
        }
    }
}

TEST(TileWindows, ClampedTilesStayOnPixelGrid) {
    const auto w = tile_windows({0.3, 0, 1000.55, 500}, {256, 256}, 0.5, 0);
    for (const auto& t : w) {
        const double off = (t.origin_x - 0.3) * 0.5;
        EXPECT_NEAR(off, std::round(off), 1e-9);
    }
}
