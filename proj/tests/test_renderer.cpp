#include <gtest/gtest.h>

#include <random>

#include "histmap/errors.hpp"
#include "histmap/renderer.hpp"
#include "oracles.hpp"

using namespace histmap;

namespace {

StyleSpec plain_style() {
    StyleSpec s = StyleSpec::historical_default();
    s.grid.reset();
    s.anti_alias = false;
    return s;
}

TileWindow window(double ox, double oy, int w, int h, double scale = 1.0) {
    TileWindow t;
    t.origin_x = ox;
    t.origin_y = oy;
    t.width_px = w;
    t.height_px = h;
    t.scale = scale;
    return t;
}

FeatureRecord rect(double x0, double y0, double x1, double y1, int cls, int z = -1) {
    FeatureRecord f;
    f.geometry = Polygon{{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}};
    f.class_id = cls;
    f.z_order = z < 0 ? default_z_order(cls) : z;
    return f;
}

bool uniform(const RasterImage& img, Rgb c) {
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (!(img.at(x, y) == c)) return false;
    return true;
}

} // namespace

TEST(RenderMap, EmptySceneIsBackground) {
    const auto s = plain_style();
    const auto img = render_map_tile({}, s, window(0, 100, 40, 30));
    EXPECT_TRUE(uniform(img, Rgb{230, 220, 200}));
}

TEST(RenderMap, WholeWindowPolygon) {
    auto s = plain_style();
    s.class_style(5).stroke_width_px = 0.0;
    s.anti_alias = true;
    const std::vector<FeatureRecord> f{rect(-10, -10, 110, 110, 5)};
    EXPECT_TRUE(uniform(render_map_tile(f, s, window(0, 100, 100, 100)), Rgb{140, 170, 200}));
}

TEST(RenderMap, LeftHalfRectangle) {
    auto s = plain_style();
    s.class_style(5).stroke_width_px = 0.0;
    const int w = 80, h = 60;
    const std::vector<FeatureRecord> f{rect(-5, -5, 40, 65, 5)};
    const auto img = render_map_tile(f, s, window(0, 60, w, h));
    EXPECT_EQ(img.at(w / 4, h / 2), (Rgb{140, 170, 200}));
    EXPECT_EQ(img.at(3 * w / 4, h / 2), (Rgb{230, 220, 200}));
}

TEST(RenderMap, MissingGlyphSourceIsConfigError) {
    auto s = plain_style();
    s.label_rule(LabelKind::house_number).enabled = true;
    s.font = "/nonexistent/glyphs.txt";
    EXPECT_THROW(render_map_tile({}, s, window(0, 10, 10, 10)), ConfigError);
    s.label_rule(LabelKind::house_number).enabled = false;
    EXPECT_NO_THROW(render_map_tile({}, s, window(0, 10, 10, 10)));
}

TEST(RenderMap, Deterministic) {
    std::mt19937_64 rng(5);
    auto s = StyleSpec::historical_default();
    for (int i = 0; i < 10; ++i) {
        const auto scene = oracle::random_scene(rng);
        EXPECT_EQ(render_map_tile(scene.features, s, scene.window), render_map_tile(scene.features, s, scene.window));
    }
}

TEST(RenderMask, EmptyIsBackground) {
    auto s = plain_style();
    s.background_class = 3;
    const auto m = render_mask_tile({}, s, window(0, 10, 7, 5));
    for (auto v : m.values()) EXPECT_EQ(v, 3);
}

TEST(RenderMask, BuildingOverRecreational) {
    const auto s = plain_style();
    const std::vector<FeatureRecord> f{rect(0, 0, 10, 10, 1), rect(5, 5, 20, 20, 3)};
    const auto m = render_mask_tile(f, s, window(0, 20, 20, 20));
    // Map point (7, 7) lies in both; pixel row = 20 - 7.5.
    EXPECT_EQ(m.at(7, 12), 1);
    EXPECT_EQ(m.at(15, 2), 3);
    EXPECT_EQ(m.at(2, 15), 1);
    EXPECT_EQ(m.at(15, 15), 4);
}

TEST(RenderMask, ZTieLaterFeatureWins) {
    const auto s = plain_style();
    const std::vector<FeatureRecord> f{rect(0, 0, 10, 10, 5, 2), rect(0, 0, 10, 10, 3, 2)};
    EXPECT_EQ(render_mask_tile(f, s, window(0, 10, 10, 10)).at(5, 5), 3);
}

TEST(RenderMask, WidestLineWins) {
    auto s = plain_style();
    s.class_style(2).stroke_width_px = 6.0;
    s.class_style(5).stroke_width_px = 2.0;
    FeatureRecord road;
    road.geometry = Polyline{{{0, 5}, {20, 5}}};
    road.class_id = 2;
    road.z_order = 0;
    FeatureRecord river = road;
    river.class_id = 5;
    river.z_order = 9;
    const auto m = render_mask_tile(std::vector{road, river}, s, window(0, 10, 20, 10));
    EXPECT_EQ(m.at(10, 4), 2);
    EXPECT_EQ(m.at(10, 0), 4);
}

TEST(RenderMask, MatchesBruteForceOracle) {
    std::mt19937_64 rng(2024);
    const auto s = StyleSpec::historical_default();
    for (int trial = 0; trial < 60; ++trial) {
        const auto scene = oracle::random_scene(rng);
        const auto got = render_mask_tile(scene.features, s, scene.window);
        const auto want = oracle::mask(scene.features, s, scene.window);
        ASSERT_EQ(got, want) << "scene " << trial;
    }
}

TEST(RenderMask, ValuesStayCategoricalWithAntiAlias) {
    std::mt19937_64 rng(8);
    auto s = StyleSpec::historical_default();
    s.anti_alias = true;
    for (int i = 0; i < 20; ++i) {
        const auto scene = oracle::random_scene(rng);
        for (auto v : render_mask_tile(scene.features, s, scene.window).values()) ASSERT_TRUE(v >= 1 && v <= 5);
    }
}

TEST(RasterizePolygon, SquareMatchesCenters) {
    const auto w = window(0, 64, 64, 64);
    const Polygon sq{{{{10, 10}, {20, 10}, {20, 20}, {10, 20}}}};
    const auto bits = rasterize_polygon(sq, w);
    EXPECT_EQ(bits.count(), 100u);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) {
            const double mx = c + 0.5, my = 64 - (r + 0.5);
            const bool inside = mx >= 10 && mx < 20 && my >= 10 && my < 20;
            ASSERT_EQ(bits.test(c, r), inside) << c << "," << r;
        }
}

TEST(RasterizePolygon, OutsideAndWholeWindow) {
    const auto w = window(0, 32, 32, 32);
    EXPECT_EQ(rasterize_polygon(Polygon{{{{100, 100}, {120, 100}, {110, 130}}}}, w).count(), 0u);
    EXPECT_EQ(rasterize_polygon(Polygon{{{{0, 0}, {32, 0}, {32, 32}, {0, 32}}}}, w).count(), 32u * 32u);
    EXPECT_EQ(rasterize_polygon(Polygon{{{{0, 0}, {10, 10}, {20, 20}}}}, w).count(), 0u);
}

TEST(RasterizePolygon, RandomPolygonsMatchPnpoly) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-10, 74);
    for (int trial = 0; trial < 200; ++trial) {
        Polygon p;
        for (int r = 0; r < 1 + int(rng() % 3); ++r) {
            Ring ring;
            for (int v = 0; v < 3 + int(rng() % 9); ++v) {
                // Quarter-unit coordinates put many edges exactly through pixel centers.
                double x = u(rng), y = u(rng);
                if (trial % 2) x = std::round(x * 4) / 4, y = std::round(y * 4) / 4;
                ring.push_back({x, y});
            }
            p.rings.push_back(ring);
        }
        const auto w = window(0, 64, 64, 64);
        const auto bits = rasterize_polygon(p, w);
        const auto rings = oracle::pixel_rings(p, w);
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c) ASSERT_EQ(bits.test(c, r), oracle::pnpoly(rings, c + 0.5, r + 0.5));
    }
}

TEST(RasterizeStroke, MatchesDistanceOracle) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5, 69);
    std::uniform_real_distribution<double> wd(0.5, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Point> pts;
        for (int v = 0; v < 2 + int(rng() % 4); ++v) pts.push_back({u(rng), u(rng)});
        const double width = wd(rng);
        const bool closed = trial % 3 == 0;
        const auto w = window(0, 64, 64, 64);
        const auto bits = rasterize_stroke(pts, closed, width, w);
        std::vector<Point> px;
        for (auto p : pts) px.push_back(oracle::to_pixel(p, w));
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c)
                ASSERT_EQ(bits.test(c, r), oracle::polyline_distance(px, closed, {c + 0.5, r + 0.5}) <= width / 2);
    }
}

TEST(Labels, HouseNumberFits) {
    auto s = plain_style();
    s.label_rule(LabelKind::house_number) = {10, {0, 0, 0}, true, 100};
    FeatureRecord b = rect(0, 0, 100, 100, 1);
    b.label = "12";
    b.label_kind = LabelKind::house_number;
    const auto r = render_map_tile_detailed(std::vector{b}, s, window(0, 100, 100, 100));
    EXPECT_EQ(r.labels.placed, 1u);
    EXPECT_EQ(r.labels.skipped, 0u);
    // Ink sits around the centroid (50, 50).
    std::size_t near_center = 0;
    for (int y = 40; y < 60; ++y)
        for (int x = 40; x < 60; ++x)
            if (r.overlay.test(x, y)) ++near_center;
    EXPECT_GT(near_center, 0u);
    EXPECT_EQ(near_center, r.overlay.count());
}

TEST(Labels, HouseNumberTooSmallIsSkipped) {
    auto s = plain_style();
    s.label_rule(LabelKind::house_number) = {10, {0, 0, 0}, true, 100};
    FeatureRecord b = rect(0, 0, 8, 8, 1);
    b.label = "12";
    b.label_kind = LabelKind::house_number;
    const auto r = render_map_tile_detailed(std::vector{b}, s, window(0, 20, 20, 20));
    EXPECT_EQ(r.labels.placed, 0u);
    EXPECT_EQ(r.labels.skipped, 1u);
    EXPECT_EQ(r.overlay.count(), 0u);
}

TEST(Labels, StreetNameRepeats) {
    auto s = plain_style();
    // 10 glyphs at 16 px are 10 * 12 = 120 px wide.
    s.label_rule(LabelKind::street_name) = {16, {0, 0, 0}, true, 100};
    FeatureRecord road;
    road.geometry = Polyline{{{0, 50}, {400, 50}}};
    road.class_id = 2;
    road.label = "Hauptweg 1";
    road.label_kind = LabelKind::street_name;
    const auto r = render_map_tile_detailed(std::vector{road}, s, window(0, 100, 400, 100));
    const double stride = 120 + 100;
    int expected = 0;
    for (double start = 0; start + 120 <= 400; start += stride) ++expected;
    EXPECT_EQ(expected, 2);
    EXPECT_EQ(r.labels.placed, std::size_t(expected));
}

TEST(Labels, StreetNameSkippedOnShortSegments) {
    auto s = plain_style();
    s.label_rule(LabelKind::street_name) = {16, {0, 0, 0}, true, 10};
    FeatureRecord road;
    // Zig-zag of 60 px segments, all shorter than the 120 px text.
    std::vector<Point> v;
    for (int i = 0; i <= 6; ++i) v.push_back({i * 60.0, i % 2 ? 20.0 : 80.0});
    road.geometry = Polyline{v};
    road.class_id = 2;
    road.label = "Hauptweg 1";
    road.label_kind = LabelKind::street_name;
    const auto r = render_map_tile_detailed(std::vector{road}, s, window(0, 100, 400, 100));
    EXPECT_EQ(r.labels.placed, 0u);
    EXPECT_GT(r.labels.skipped, 0u);
}

TEST(Labels, NeverAffectMask) {
    auto s = plain_style();
    for (auto& l : s.labels) l.enabled = true;
    FeatureRecord b = rect(0, 0, 60, 60, 1);
    b.label = "999";
    b.label_kind = LabelKind::house_number;
    auto s_off = s;
    for (auto& l : s_off.labels) l.enabled = false;
    s_off.grid.reset();
    s.grid = GridStyle{};
    s.grid->spacing = 10;
    EXPECT_EQ(render_mask_tile(std::vector{b}, s, window(0, 60, 60, 60)),
              render_mask_tile(std::vector{b}, s_off, window(0, 60, 60, 60)));
}

TEST(EstimateClassColor, ConstantImage) {
    RasterImage img(9, 9, {100, 150, 200});
    EXPECT_EQ(estimate_class_color(img, 4, 4), (Rgb{100, 150, 200}));
    EXPECT_EQ(estimate_class_color(img, 0, 8), (Rgb{100, 150, 200}));
}

TEST(EstimateClassColor, ThirteenWhiteTwelveBlack) {
    RasterImage img(5, 5, {0, 0, 0});
    int white = 0;
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            if ((x + y) % 2 == 0) {
                img.set(x, y, {255, 255, 255});
                ++white;
            }
    ASSERT_EQ(white, 13);
    // Exact mean 13 * 255 / 25 = 132.6, which rounds half-up to 133.
    EXPECT_EQ(estimate_class_color(img, 2, 2), (Rgb{133, 133, 133}));
}

TEST(EstimateClassColor, CornerUsesClampedWindow) {
    std::mt19937_64 rng(1);
    const auto img = oracle::random_image(rng, 7, 6);
    for (auto [x, y] : {std::pair{0, 0}, {6, 5}, {1, 4}, {3, 3}}) {
        long sum[3] = {0, 0, 0};
        long n = 0;
        for (int j = y - 2; j <= y + 2; ++j)
            for (int i = x - 2; i <= x + 2; ++i) {
                if (i < 0 || j < 0 || i >= 7 || j >= 6) continue;
                sum[0] += img.at(i, j).r;
                sum[1] += img.at(i, j).g;
                sum[2] += img.at(i, j).b;
                ++n;
            }
        if (x == 0 && y == 0) EXPECT_EQ(n, 9);
        const auto got = estimate_class_color(img, x, y);
        EXPECT_EQ(got.r, int(std::floor(double(sum[0]) / n + 0.5)));
        EXPECT_EQ(got.g, int(std::floor(double(sum[1]) / n + 0.5)));
        EXPECT_EQ(got.b, int(std::floor(double(sum[2]) / n + 0.5)));
    }
}

TEST(EstimateClassColor, OutOfBoundsIsRangeError) {
    RasterImage img(5, 5);
    EXPECT_THROW(estimate_class_color(img, 5, 0), RangeError);
    EXPECT_THROW(estimate_class_color(img, -1, 2), RangeError);
}

TEST(DrawGrid, LinesAtSpacingMultiples) {
    StyleSpec s = plain_style();
    s.grid = GridStyle{500, {90, 90, 90}, 1};
    RasterImage img(500, 500, {1, 2, 3});
    Bitmap overlay;
    draw_grid(s, window(0, 0, 500, 500), img, &overlay);
    for (int i = 0; i < 500; ++i) {
        EXPECT_EQ(img.at(0, i), (Rgb{90, 90, 90}));
        EXPECT_EQ(img.at(i, 0), (Rgb{90, 90, 90}));
    }
    EXPECT_EQ(img.at(499, 250), (Rgb{1, 2, 3}));
    EXPECT_EQ(img.at(250, 499), (Rgb{1, 2, 3}));
    EXPECT_EQ(overlay.count(), 999u);
}

TEST(DrawGrid, DisabledOrNoMultipleLeavesImage) {
    StyleSpec s = plain_style();
    RasterImage img(50, 40, {7, 8, 9});
    const RasterImage before = img;
    draw_grid(s, window(0, 40, 50, 40), img);
    EXPECT_EQ(img, before);
    s.grid = GridStyle{10000, {0, 0, 0}, 1};
    draw_grid(s, window(100, 900, 50, 40), img);
    EXPECT_EQ(img, before);
}

TEST(PairAlignment, RandomScenes) {
    std::mt19937_64 rng(77);
    auto s = StyleSpec::historical_default();
    s.anti_alias = false;
    s.grid->spacing = 40;
    std::size_t checked_total = 0;
    for (int i = 0; i < 20; ++i) {
        const auto scene = oracle::random_scene(rng);
        const auto r = render_map_tile_detailed(scene.features, s, scene.window);
        const auto mask = render_mask_tile(scene.features, s, scene.window);
        std::size_t checked = 0;
        EXPECT_EQ(oracle::alignment_mismatches(scene.features, s, scene.window, r.image, mask, r.overlay, &checked), 0u);
        checked_total += checked;
    }
    EXPECT_GT(checked_total, 20u * 64u * 64u / 4u);
}
