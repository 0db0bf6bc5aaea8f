#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histmap/degradation.hpp"
#include "histmap/geo_core.hpp"
#include "histmap/style.hpp"

namespace histmap {

enum class DatasetVariant { style_transferred, stochastic, external };

std::string_view to_string(DatasetVariant variant);
DatasetVariant variant_from_string(std::string_view text);

struct ManifestEntry {
    std::string pair_id;
    std::int64_t tile_id = 0;
    std::string map_path;  ///< relative to the dataset directory
    std::string mask_path;
    TileWindow window;
    std::uint64_t seed = 0;
    DatasetVariant variant = DatasetVariant::style_transferred;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Dataset index. On disk: one JSON header line, then one JSON object per
/// entry, ordered by tile_id. No timestamps.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string style_hash;
    std::string degradation_hash;
    int class_count = kClassCount;

    std::string serialize() const;
    static DatasetManifest parse(std::string_view text);
    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string pair_id_for(std::int64_t tile_id);
std::string style_digest(const StyleSpec& style);
std::string degradation_digest(const DegradationConfig& config);

struct BuildOptions {
    unsigned jobs = 1;
    bool colorized_masks = false; ///< also write masks_color/{pair_id}.png
};

/// Renders, degrades and writes every window under out_dir:
/// maps/{pair_id}.png, masks/{pair_id}.png and manifest.txt (written last).
/// Files are written under a ".partial" name and renamed once complete, so a
/// failed tile leaves only quarantined partial files and no manifest.
DatasetManifest build_dataset(std::span<const FeatureRecord> features, const StyleSpec& style,
                              std::span<const TileWindow> windows, const DegradationConfig& config,
                              const std::filesystem::path& out_dir, const BuildOptions& options = {});

/// Re-renders one entry's map exactly as build_dataset wrote it.
RasterImage rebuild_map(std::span<const FeatureRecord> features, const StyleSpec& style,
                        const ManifestEntry& entry, const Degrader& degrader);

/// Writes a degraded copy of an existing dataset: maps pass through the
/// degrader (per-tile seed from config.master_seed), masks are copied.
DatasetManifest degrade_dataset(const std::filesystem::path& in_dir, const DegradationConfig& config,
                                const std::filesystem::path& out_dir, const BuildOptions& options = {});

struct SplitAssignment {
    std::set<std::string> train;
    std::set<std::string> val;
    std::uint64_t seed = 0;
    double ratio = 0.8;

    std::string serialize() const;
    static SplitAssignment parse(std::string_view text);

    friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

/// Sorts ids lexicographically, shuffles with Fisher-Yates driven by
/// SplitMix64(seed) (j = below(i + 1) for i = n-1 .. 1), and assigns the
/// first floor(ratio * n) ids to train.
SplitAssignment split_ids(std::vector<std::string> ids, double ratio, std::uint64_t seed);
SplitAssignment split_manifest(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Rethrows the
/// exception of the lowest failing index.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

} // namespace histmap
