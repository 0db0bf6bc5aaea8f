#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "fixtures.hpp"
#include "histmap/dataset.hpp"
#include "histmap/errors.hpp"
#include "histmap/random.hpp"
#include "histmap/renderer.hpp"

using namespace histmap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("histmap_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

StyleSpec labelled_style() {
    auto s = StyleSpec::historical_default();
    s.grid = GridStyle{100.0, {90, 90, 90}, 1.0};
    for (auto& r : s.labels) r.enabled = true;
    return s;
}

std::vector<TileWindow> town_windows() {
    return tile_windows({0, 0, 400, 400}, {100, 100}, 0.5, 0);
}

std::vector<std::string> numbered_ids(int n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back(pair_id_for(i));
    return ids;
}

} // namespace

TEST(Manifest, RoundTrip) {
    DatasetManifest m;
    m.style_hash = "0123456789abcdef";
    m.degradation_hash = "fedcba9876543210";
    for (int i = 0; i < 3; ++i) {
        ManifestEntry e;
        e.tile_id = i;
        e.pair_id = pair_id_for(i);
        e.map_path = "maps/" + e.pair_id + ".png";
        e.mask_path = "masks/" + e.pair_id + ".png";
        e.window.tile_id = i;
        e.window.origin_x = 0.1 * i;
        e.window.origin_y = 1e6 + 1.0 / 3.0;
        e.window.width_px = 512;
        e.window.height_px = 256;
        e.window.scale = 0.37;
        e.seed = 0xFFFFFFFFFFFFFFF0ULL + std::uint64_t(i);
        e.variant = i == 1 ? DatasetVariant::stochastic : DatasetVariant::style_transferred;
        m.entries.push_back(e);
    }
    const auto text = m.serialize();
    EXPECT_EQ(DatasetManifest::parse(text), m);
    EXPECT_EQ(DatasetManifest::parse(text).serialize(), text);
    EXPECT_EQ(text.find("time"), std::string::npos);
}

TEST(Manifest, RejectsDuplicatePairIds) {
    DatasetManifest m;
    ManifestEntry e;
    e.pair_id = "000001";
    e.map_path = "maps/000001.png";
    e.mask_path = "masks/000001.png";
    m.entries = {e, e};
    EXPECT_THROW(DatasetManifest::parse(m.serialize()), ParseError);
    EXPECT_THROW(DatasetManifest::parse("not json\n"), ParseError);
}

TEST(PairId, ZeroPadded) {
    EXPECT_EQ(pair_id_for(0), "000000");
    EXPECT_EQ(pair_id_for(42), "000042");
    EXPECT_EQ(pair_id_for(1234567), "1234567");
}

TEST(BuildDataset, FourWindowsEightFiles) {
    TempDir dir("ds4");
    const auto features = fixture::town();
    const auto windows = tile_windows({0, 0, 400, 400}, {100, 100}, 0.5, 0);
    ASSERT_EQ(windows.size(), 4u);
    const auto m = build_dataset(features, labelled_style(), windows, DegradationConfig::disabled(), dir.path);
    ASSERT_EQ(m.entries.size(), 4u);
    std::size_t pngs = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path))
        if (e.path().extension() == ".png") ++pngs;
    EXPECT_EQ(pngs, 8u);
    for (const auto& e : m.entries) {
        EXPECT_EQ(e.variant, DatasetVariant::style_transferred);
        const auto map = read_png_rgb((dir.path / e.map_path).string());
        const auto mask = read_png_mask((dir.path / e.mask_path).string());
        EXPECT_EQ(map.width(), mask.width());
        EXPECT_EQ(map.height(), mask.height());
        EXPECT_EQ(mask, render_mask_tile(features, labelled_style(), e.window));
    }
    EXPECT_EQ(DatasetManifest::load(dir.path / "manifest.txt"), m);
}

TEST(BuildDataset, NoWindowsWritesEmptyManifestOnly) {
    TempDir dir("ds0");
    const auto m = build_dataset(fixture::town(), labelled_style(), {}, DegradationConfig{}, dir.path);
    EXPECT_TRUE(m.entries.empty());
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path))
        if (e.is_regular_file() && e.path().filename() != "manifest.txt") ++files;
    EXPECT_EQ(files, 0u);
}

TEST(BuildDataset, RebuildIsByteIdentical) {
    TempDir a("rb_a"), b("rb_b");
    const auto features = fixture::town();
    const auto windows = town_windows();
    DegradationConfig cfg;
    cfg.master_seed = 7;
    build_dataset(features, labelled_style(), windows, cfg, a.path);
    build_dataset(features, labelled_style(), windows, cfg, b.path);
    for (const auto& e : fs::recursive_directory_iterator(a.path)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a.path);
        EXPECT_EQ(slurp(e.path()), slurp(b.path / rel)) << rel;
    }
}

TEST(BuildDataset, JobCountDoesNotChangeOutput) {
    TempDir a("jobs1"), b("jobs4");
    const auto features = fixture::town();
    const auto windows = tile_windows({0, 0, 400, 400}, {64, 64}, 0.5, 16);
    DegradationConfig cfg;
    cfg.master_seed = 11;
    build_dataset(features, labelled_style(), windows, cfg, a.path, {1, true});
    build_dataset(features, labelled_style(), windows, cfg, b.path, {4, true});
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a.path)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a.path);
        ASSERT_EQ(slurp(e.path()), slurp(b.path / rel)) << rel;
        ++compared;
    }
    EXPECT_EQ(compared, 2 * windows.size() + windows.size() + 1);
}

TEST(BuildDataset, RebuildMapReproducesEntry) {
    TempDir dir("rebuild");
    const auto features = fixture::town();
    DegradationConfig cfg;
    cfg.master_seed = 99;
    const auto m = build_dataset(features, labelled_style(), town_windows(), cfg, dir.path);
    const Degrader degrader(cfg);
    for (const auto& e : m.entries) {
        EXPECT_EQ(e.variant, DatasetVariant::stochastic);
        EXPECT_EQ(e.seed, derive_tile_seed(99, std::uint64_t(e.tile_id)));
        EXPECT_EQ(rebuild_map(features, labelled_style(), e, degrader), read_png_rgb((dir.path / e.map_path).string()));
    }
}

TEST(BuildDataset, FailedTileLeavesNoManifest) {
    TempDir dir("fail");
    const auto windows = town_windows();
    // A directory squatting on a map path makes the final rename fail.
    fs::create_directories(dir.path / "maps" / (pair_id_for(windows[2].tile_id) + ".png") / "x");
    try {
        build_dataset(fixture::town(), labelled_style(), windows, DegradationConfig::disabled(), dir.path);
        FAIL() << "expected TileError";
    } catch (const TileError& e) {
        EXPECT_EQ(e.tile_id(), windows[2].tile_id);
    }
    EXPECT_FALSE(fs::exists(dir.path / "manifest.txt"));
    EXPECT_TRUE(fs::exists(dir.path / "maps" / (pair_id_for(windows[2].tile_id) + ".png.partial")));
}

TEST(BuildDataset, DuplicateTileIdsRejected) {
    TempDir dir("dup");
    auto windows = town_windows();
    windows[1].tile_id = windows[0].tile_id;
    EXPECT_THROW(build_dataset(fixture::town(), labelled_style(), windows, DegradationConfig{}, dir.path),
                 ValidationError);
}

TEST(DegradeDataset, CopiesMasksAndDegradesMaps) {
    TempDir clean("dd_in"), out("dd_out");
    const auto features = fixture::town();
    const auto m = build_dataset(features, labelled_style(), town_windows(), DegradationConfig::disabled(), clean.path);
    DegradationConfig cfg;
    cfg.master_seed = 5;
    const auto d = degrade_dataset(clean.path, cfg, out.path);
    ASSERT_EQ(d.entries.size(), m.entries.size());
    const Degrader degrader(cfg);
    for (std::size_t i = 0; i < d.entries.size(); ++i) {
        EXPECT_EQ(d.entries[i].variant, DatasetVariant::stochastic);
        EXPECT_EQ(slurp(out.path / d.entries[i].mask_path), slurp(clean.path / m.entries[i].mask_path));
        const auto src = read_png_rgb((clean.path / m.entries[i].map_path).string());
        EXPECT_EQ(read_png_rgb((out.path / d.entries[i].map_path).string()),
                  degrader.apply(src, std::uint64_t(m.entries[i].tile_id)));
    }
}

TEST(TileSeed, KnownValue) {
    // First SplitMix64 output for state 0.
    EXPECT_EQ(derive_tile_seed(0, 0), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(SplitMix64(0).next(), 0xE220A8397B1DCDAFULL);
}

TEST(TileSeed, NoCollisionsOverAMillionTiles) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1 << 21);
    for (std::uint64_t t = 0; t < 1000000; ++t) ASSERT_TRUE(seen.insert(derive_tile_seed(42, t)).second) << t;
}

TEST(Split, ExampleSizes) {
    const auto s = split_ids(numbered_ids(2269), 0.8, 42);
    EXPECT_EQ(s.train.size(), 1815u);
    EXPECT_EQ(s.val.size(), 454u);
    const auto t = split_ids(numbered_ids(10), 0.8, 1);
    EXPECT_EQ(t.train.size(), 8u);
    EXPECT_EQ(t.val.size(), 2u);
}

TEST(Split, PartitionProperty) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + int(rng() % 300);
        const double ratio = 0.05 + 0.9 * double(rng() % 1000) / 1000.0;
        const auto ids = numbered_ids(n);
        const auto s = split_ids(ids, ratio, rng());
        ASSERT_EQ(s.train.size() + s.val.size(), std::size_t(n));
        ASSERT_EQ(s.train.size(), std::size_t(std::floor(ratio * n)));
        for (const auto& id : s.train) ASSERT_EQ(s.val.count(id), 0u);
    }
}

TEST(Split, IndependentOfInputOrder) {
    auto ids = numbered_ids(500);
    const auto a = split_ids(ids, 0.7, 3);
    std::shuffle(ids.begin(), ids.end(), std::mt19937_64(1));
    EXPECT_EQ(split_ids(ids, 0.7, 3), a);
    EXPECT_NE(split_ids(ids, 0.7, 4), a);
}

TEST(Split, SameAcrossManifestVariants) {
    TempDir clean("sp_clean"), noisy("sp_noisy");
    const auto m = build_dataset(fixture::town(), labelled_style(), town_windows(), DegradationConfig::disabled(), clean.path);
    const auto d = degrade_dataset(clean.path, DegradationConfig{}, noisy.path);
    EXPECT_EQ(split_manifest(m, 0.5, 8), split_manifest(d, 0.5, 8));
}

TEST(Split, FileRoundTrip) {
    const auto s = split_ids(numbered_ids(37), 0.75, 123);
    const auto text = s.serialize();
    EXPECT_EQ(SplitAssignment::parse(text), s);
    EXPECT_EQ(text.rfind("# histmap-split", 0), 0u);
}

TEST(Split, InvalidInputs) {
    EXPECT_THROW(split_ids({}, 0.8, 1), ValidationError);
    EXPECT_THROW(split_ids({"a", "a"}, 0.8, 1), ValidationError);
    EXPECT_THROW(split_ids({"a", "b"}, 1.0, 1), ConfigError);
    EXPECT_THROW(split_ids({"a", "b"}, 0.0, 1), ConfigError);
}

TEST(ParallelFor, LowestFailureWins) {
    std::atomic<int> ran{0};
    try {
        parallel_for(100, 4, [&](std::size_t i) {
            ++ran;
            if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "17");
    }
}
